// SPDX-License-Identifier: Apache-2.0
#include "tbnrf/photon_stats.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace tbnrf {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::domain_error(msg);
}

}  // namespace

double multithermal_pmf(std::uint64_t n, double mean_per_mode, double modes) {
    require(mean_per_mode > 0.0, "multithermal_pmf: mean_per_mode must be > 0");
    require(modes >= 1.0, "multithermal_pmf: modes must be >= 1");
    const double nn = static_cast<double>(n);
    const double log_p = std::lgamma(nn + modes) - std::lgamma(nn + 1.0) -
                         std::lgamma(modes) - modes * std::log1p(mean_per_mode) -
                         nn * std::log1p(1.0 / mean_per_mode);
    return std::exp(log_p);
}

MomentPair bernoulli_detected_moments(const MomentPair& photon_moments, double eta) {
    require(eta >= 0.0 && eta <= 1.0, "bernoulli_detected_moments: eta must be in [0,1]");
    return {eta * photon_moments.mean,
            eta * eta * photon_moments.variance +
                eta * (1.0 - eta) * photon_moments.mean};
}

namespace {

MomentPair conditional_moments(const noise::Conditional& c) {
    const double m = c.unconditioned_mean;
    const double mu = c.modes;
    const double mc = static_cast<double>(c.herald_value);
    const double e = c.herald_efficiency;
    const double s = m + mu;
    const double mean = (mc * (m + e * mu) + mu * m * (1.0 - e)) / s;
    const double var =
        (1.0 - e) / (s * s) *
        (e * mc * mu * mu + m * mu * (mc + 2.0 * e * mc + mu) +
         m * m * (2.0 * mc + 2.0 * mu - e * mu));
    return {mean, var};
}

}  // namespace

MomentPair noise_moments(const NoiseModel& model) {
    validate(model);
    return std::visit(
        [](const auto& m) -> MomentPair {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, noise::None>) {
                return {0.0, 0.0};
            } else if constexpr (std::is_same_v<T, noise::Coherent>) {
                return {m.mean, m.mean};
            } else if constexpr (std::is_same_v<T, noise::MultiThermal>) {
                return {m.mean, m.mean * (m.mean / m.modes + 1.0)};
            } else if constexpr (std::is_same_v<T, noise::Fock>) {
                return bernoulli_detected_moments(
                    {static_cast<double>(m.photon_number), 0.0},
                    m.detection_efficiency);
            } else {
                return conditional_moments(m);
            }
        },
        model);
}

void validate(const NoiseModel& model) {
    std::visit(
        [](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, noise::Coherent>) {
                require(m.mean >= 0.0, "noise.mean must be >= 0");
            } else if constexpr (std::is_same_v<T, noise::MultiThermal>) {
                require(m.mean >= 0.0, "noise.mean must be >= 0");
                require(m.modes >= 1.0, "noise.modes must be >= 1");
            } else if constexpr (std::is_same_v<T, noise::Fock>) {
                require(m.detection_efficiency >= 0.0 && m.detection_efficiency <= 1.0,
                        "noise.detection_efficiency must be in [0,1]");
            } else if constexpr (std::is_same_v<T, noise::Conditional>) {
                require(m.unconditioned_mean >= 0.0,
                        "noise.unconditioned_mean must be >= 0");
                require(m.modes >= 1.0, "noise.modes must be >= 1");
                require(m.herald_efficiency >= 0.0 && m.herald_efficiency <= 1.0,
                        "noise.herald_efficiency must be in [0,1]");
            }
        },
        model);
}

}  // namespace tbnrf
