// SPDX-License-Identifier: Apache-2.0
#include "tbnrf/thresholds.hpp"

#include <cmath>
#include <stdexcept>

namespace tbnrf {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw std::domain_error(msg);
}

void check_common(double eta, double mu, double mean_m) {
    require(eta > 0.0 && eta <= 1.0, "eta must be in (0,1]");
    require(mu >= 1.0, "mu must be >= 1");
    require(mean_m > 0.0, "mean_m must be > 0");
}

}  // namespace

double t_min(double eta, double mu, double mean_m) {
    check_common(eta, mu, mean_m);
    const double r = eta * mu / mean_m;
    return (1.0 + r) - std::sqrt(r * (2.0 + r));
}

ThresholdReport thermal_noise_max(double eta, double t, double mu, double mean_m,
                                  double mu_noise) {
    check_common(eta, mu, mean_m);
    require(t > 0.0 && t <= 1.0, "t must be in (0,1]");
    require(mu_noise >= 1.0, "mu_noise must be >= 1");
    const double disc = 2.0 * eta * t * mu - (1.0 - t) * (1.0 - t) * mean_m;
    ThresholdReport report;
    report.kind = ThresholdKind::thermal_noise_max;
    if (disc <= 0.0) {
        report.feasible = false;
        return report;
    }
    report.feasible = true;
    report.value = std::sqrt(mu_noise * disc * mean_m / mu);
    return report;
}

ThresholdReport fock_noise_threshold(double eta, double t, double mu, double mean_m) {
    check_common(eta, mu, mean_m);
    require(t > 0.0 && t <= 1.0, "t must be in (0,1]");
    const double bound =
        -(2.0 - (1.0 - t) * (1.0 - t) * mean_m / (eta * t * mu)) * mean_m;
    ThresholdReport report;
    report.feasible = true;
    if (bound < 0.0) {
        report.kind = ThresholdKind::none_required;
    } else {
        report.kind = ThresholdKind::fock_noise_min;
        report.value = bound;
    }
    return report;
}

Classification classify(const TwbParams& p, const NoiseModel& noise) {
    const double r = nrf_noisy_lossy(p, noise);
    if (std::abs(r - 1.0) <= 1e-12) return Classification::boundary;
    return r < 1.0 ? Classification::nonclassical : Classification::classical;
}

double bisect_root(const std::function<double(double)>& f, double lo, double hi,
                   double x_tol, int max_iter) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    require(flo * fhi < 0.0, "bisect_root: no sign change on the bracket");
    for (int i = 0; i < max_iter && hi - lo > x_tol; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fmid = f(mid);
        if (fmid == 0.0) return mid;
        if (flo * fmid < 0.0) {
            hi = mid;
        } else {
            lo = mid;
            flo = fmid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace tbnrf
