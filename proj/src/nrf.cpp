// SPDX-License-Identifier: Apache-2.0
#include "tbnrf/nrf.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace tbnrf {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::domain_error(msg);
}

void require_positive_total(double total) {
    require(total > 0.0, "degenerate input: total mean is zero, shot-noise level undefined");
}

void require_symmetric(const TwbParams& p, const char* fn) {
    require(p.eta1 == p.eta2,
            std::string(fn) + ": transcription form requires eta1 == eta2");
}

}  // namespace

void validate(const TwbParams& p) {
    require(p.mean_m >= 0.0, "twb.mean_m must be >= 0");
    require(p.modes >= 1.0, "twb.modes must be >= 1");
    require(p.eta1 > 0.0 && p.eta1 <= 1.0, "twb.eta1 must be in (0,1]");
    require(p.eta2 > 0.0 && p.eta2 <= 1.0, "twb.eta2 must be in (0,1]");
    require(p.transmittance > 0.0 && p.transmittance <= 1.0,
            "twb.transmittance must be in (0,1]");
}

double nrf_from_moments(const ShotMoments& s) {
    require_positive_total(s.mean1 + s.mean2);
    return s.var_diff / (s.mean1 + s.mean2);
}

double nrf_twb(double m1, double m2, double eta1, double eta2, double mu) {
    return nrf_noisy_two_arm(m1, m2, eta1, eta2, mu, {0.0, 0.0}, {0.0, 0.0});
}

double nrf_noisy_two_arm(double m1, double m2, double eta1, double eta2, double mu,
                         const MomentPair& noise1, const MomentPair& noise2) {
    const double total = m1 + m2 + noise1.mean + noise2.mean;
    require_positive_total(total);
    const double d = m1 - m2;
    return 1.0 - 2.0 * std::sqrt(eta1 * eta2) * std::sqrt(m1 * m2) / total +
           d * d / (mu * total) +
           (noise1.variance - noise1.mean + noise2.variance - noise2.mean) / total;
}

double nrf_noisy_one_arm(double m1, double m2, double eta1, double eta2, double mu,
                         const MomentPair& noise) {
    return nrf_noisy_two_arm(m1, m2, eta1, eta2, mu, {0.0, 0.0}, noise);
}

double nrf_noisy_lossy(const TwbParams& p, const NoiseModel& noise) {
    validate(p);
    const double t = p.transmittance;
    return nrf_noisy_one_arm(p.mean_m, t * p.mean_m, p.eta1, p.eta2 * t, p.modes,
                             noise_moments(noise));
}

NrfTerms nrf_terms(const TwbParams& p, const NoiseModel& noise) {
    validate(p);
    const double t = p.transmittance;
    const double m1 = p.mean_m;
    const double m2 = t * p.mean_m;
    const MomentPair nm = noise_moments(noise);
    const double total = m1 + m2 + nm.mean;
    require_positive_total(total);
    NrfTerms terms;
    terms.correlation =
        -2.0 * std::sqrt(p.eta1 * p.eta2 * t) * std::sqrt(m1 * m2) / total;
    terms.imbalance = (m1 - m2) * (m1 - m2) / (p.modes * total);
    terms.excess = (nm.variance - nm.mean) / total;
    return terms;
}

double nrf_coherent(const TwbParams& p, double mean_noise) {
    validate(p);
    require_symmetric(p, "nrf_coherent");
    const double m = p.mean_m;
    const double t = p.transmittance;
    const double eta = p.eta1;
    const double denom = (1.0 + t) * m + mean_noise;
    require_positive_total(denom);
    return 1.0 - 2.0 * eta * t * m / denom +
           (1.0 - t) * (1.0 - t) * m * m / (p.modes * denom);
}

double nrf_thermal(const TwbParams& p, double mean_noise, double modes_noise) {
    require(modes_noise >= 1.0, "nrf_thermal: modes_noise must be >= 1");
    const double denom = (1.0 + p.transmittance) * p.mean_m + mean_noise;
    return nrf_coherent(p, mean_noise) +
           mean_noise * mean_noise / (modes_noise * denom);
}

double nrf_fock(const TwbParams& p, double mean_noise) {
    const double t = p.transmittance;
    const double denom = (1.0 + t) * p.mean_m + mean_noise;
    return nrf_coherent(p, mean_noise) - p.eta1 * t * mean_noise / denom;
}

}  // namespace tbnrf
