// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <variant>

namespace tbnrf {

/// Mean and variance of a detected photon-number distribution,
/// in detected photons (resp. photons^2) per shot.
struct MomentPair {
    double mean = 0.0;
    double variance = 0.0;
};

// Noise channels added to one arm of the twin beam.
// All means are detected means; efficiencies live in [0,1].
namespace noise {

struct None {};

/// Poissonian source: variance equals the mean.
struct Coherent {
    double mean = 0.0;
};

/// Multi-mode thermal source with `modes` equally populated modes
/// (non-integer mode counts allowed).
struct MultiThermal {
    double mean = 0.0;
    double modes = 1.0;
};

/// Fock state |n> detected with efficiency eta_f.
struct Fock {
    std::uint64_t photon_number = 0;
    double detection_efficiency = 1.0;
};

/// Heralded conditional state: the signal arm of an auxiliary multithermal
/// twin beam post-selected on the idler detecting exactly `herald_value`
/// counts. `unconditioned_mean` is the detected mean of the unconditioned
/// state in one arm.
struct Conditional {
    double unconditioned_mean = 0.0;
    double modes = 1.0;
    std::uint64_t herald_value = 0;
    double herald_efficiency = 1.0;
};

}  // namespace noise

using NoiseModel = std::variant<noise::None, noise::Coherent, noise::MultiThermal,
                                noise::Fock, noise::Conditional>;

/// Probability of counting n photons from a thermal field of `modes` equally
/// populated modes with `mean_per_mode` photons per mode (negative-binomial
/// law, gamma-generalized to non-integer mode counts). Evaluated in log space
/// so large n does not overflow.
/// Throws std::domain_error if mean_per_mode <= 0 or modes < 1.
double multithermal_pmf(std::uint64_t n, double mean_per_mode, double modes);

/// Moments of a photon-number distribution after Bernoulli detection with
/// efficiency eta: mean -> eta*mean, var -> eta^2*var + eta*(1-eta)*mean.
/// Throws std::domain_error if eta is outside [0,1].
MomentPair bernoulli_detected_moments(const MomentPair& photon_moments, double eta);

/// Detected mean/variance contributed by a noise source.
MomentPair noise_moments(const NoiseModel& model);

/// Validates the invariants of a noise model; throws std::domain_error with
/// the offending field named.
void validate(const NoiseModel& model);

}  // namespace tbnrf
