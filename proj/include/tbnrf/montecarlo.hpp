// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "tbnrf/nrf.hpp"
#include "tbnrf/photon_stats.hpp"

namespace tbnrf {

/// Detected counts of one shot.
struct ShotRecord {
    std::uint32_t k1 = 0;
    std::uint32_t k2 = 0;
};

struct NrfEstimate {
    double r_hat = 0.0;
    double std_err = 0.0;
    std::uint64_t shots = 0;
    double mean1 = 0.0;
    double mean2 = 0.0;
};

/// Thrown when the heralded rejection sampler's acceptance probability is
/// below 1e-6.
class rejection_timeout_error : public std::runtime_error {
  public:
    explicit rejection_timeout_error(double acceptance);
    double acceptance() const { return acceptance_; }

  private:
    double acceptance_;
};

using Rng = std::mt19937_64;

/// Derives the engine for shard `index` from a base seed (splitmix64).
Rng make_shard_rng(std::uint64_t base_seed, std::uint64_t index);

/// Total photon (or count) draw from a multithermal field with the given
/// TOTAL mean, via the gamma-Poisson mixture (supports non-integer modes).
std::uint64_t sample_multithermal(double mean_total, double modes, Rng& rng);

enum class SignalEfficiency { same_as_herald, unit };

/// One heralded draw of the conditional noise source: samples the
/// unconditioned twin beam, keeps shots whose idler count equals the herald
/// value, returns the signal count under the chosen detection interpretation.
std::uint64_t sample_conditional_noise(const noise::Conditional& model,
                                       SignalEfficiency interpretation, Rng& rng);

/// One detected-count draw from a noise source (conditional sources use the
/// same_as_herald interpretation, which matches the analytic moments).
std::uint64_t sample_noise(const NoiseModel& model, Rng& rng);

/// One shot of the full experiment: shared photon number n from the
/// multithermal law, arm 1 detected at eta1, arm 2 at eta2*t plus an
/// independent noise draw.
ShotRecord sample_shot(const TwbParams& p, const NoiseModel& noise, Rng& rng);

/// Generates `shots` records. Deterministic for fixed seed regardless of
/// `threads`: work is split into fixed-size shards, shard i seeded from
/// (seed, i).
std::vector<ShotRecord> simulate_shots(const TwbParams& p, const NoiseModel& noise,
                                       std::uint64_t shots, std::uint64_t seed,
                                       unsigned threads = 1);

/// Empirical NRF with a delta-method standard error (influence function of
/// the variance/mean-sum ratio, sample covariance included).
NrfEstimate estimate_nrf(const TwbParams& p, const NoiseModel& noise,
                         std::uint64_t shots, std::uint64_t seed,
                         unsigned threads = 1);

/// Estimate from already-generated shots.
NrfEstimate estimate_nrf(const std::vector<ShotRecord>& shots);

}  // namespace tbnrf
