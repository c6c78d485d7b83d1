// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <optional>

#include "tbnrf/nrf.hpp"

namespace tbnrf {

enum class ThresholdKind {
    transmittance_min,
    thermal_noise_max,
    fock_noise_min,
    none_required,
};

struct ThresholdReport {
    ThresholdKind kind = ThresholdKind::none_required;
    std::optional<double> value;  ///< present iff a finite boundary exists
    bool feasible = false;        ///< some setting preserves R < 1
};

/// Smallest transmittance for which sub-shot-noise survives Poissonian
/// noise: t1 = (1 + eta*mu/m) - sqrt((eta*mu/m)(2 + eta*mu/m)).
/// Always in (0,1). Throws std::domain_error on nonpositive mean_m.
double t_min(double eta, double mu, double mean_m);

/// Largest multithermal noise mean preserving R < 1. Infeasible when
/// 2*eta*t*mu - (1-t)^2*mean_m <= 0 (t below t_min).
ThresholdReport thermal_noise_max(double eta, double t, double mu, double mean_m,
                                  double mu_noise);

/// Fock-noise condition: above t_min any detected Fock mean keeps R < 1
/// (none_required); below t_min only means above the returned minimum do.
ThresholdReport fock_noise_threshold(double eta, double t, double mu, double mean_m);

enum class Classification { nonclassical, classical, boundary };

/// Classifies the transmitted state by its NRF, with a boundary band
/// |R - 1| <= 1e-12.
Classification classify(const TwbParams& p, const NoiseModel& noise);

/// Bisection root of f on [lo, hi]; requires a sign change. Used as the
/// regression oracle for the closed-form thresholds.
double bisect_root(const std::function<double(double)>& f, double lo, double hi,
                   double x_tol = 1e-12, int max_iter = 200);

}  // namespace tbnrf
