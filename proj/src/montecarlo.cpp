// SPDX-License-Identifier: Apache-2.0
#include "tbnrf/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

namespace tbnrf {

namespace {

constexpr std::uint64_t kShardSize = 1u << 16;
constexpr double kMinAcceptance = 1e-6;

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t binomial(std::uint64_t n, double p, Rng& rng) {
    if (n == 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;
    std::binomial_distribution<std::uint64_t> dist(n, p);
    return dist(rng);
}

std::uint64_t poisson(double mean, Rng& rng) {
    if (mean <= 0.0) return 0;
    std::poisson_distribution<std::uint64_t> dist(mean);
    return dist(rng);
}

}  // namespace

rejection_timeout_error::rejection_timeout_error(double acceptance)
    : std::runtime_error([acceptance] {
          std::ostringstream os;
          os << "conditional herald rejection timeout: estimated acceptance rate "
             << acceptance << " is below " << kMinAcceptance;
          return os.str();
      }()),
      acceptance_(acceptance) {}

Rng make_shard_rng(std::uint64_t base_seed, std::uint64_t index) {
    return Rng(splitmix64(base_seed ^ splitmix64(index)));
}

std::uint64_t sample_multithermal(double mean_total, double modes, Rng& rng) {
    if (mean_total <= 0.0) return 0;
    std::gamma_distribution<double> gamma(modes, mean_total / modes);
    return poisson(gamma(rng), rng);
}

std::uint64_t sample_conditional_noise(const noise::Conditional& model,
                                       SignalEfficiency interpretation, Rng& rng) {
    validate(NoiseModel{model});
    const double mean = model.unconditioned_mean;
    const double eta = model.herald_efficiency;
    const std::uint64_t target = model.herald_value;
    if (eta == 0.0 || mean == 0.0) {
        // Herald counts are identically zero (vacuum or blind herald);
        // a nonzero unconditioned mean with eta == 0 needs infinite light.
        if (target == 0 && !(eta == 0.0 && mean > 0.0)) return 0;
        throw rejection_timeout_error(0.0);
    }
    const double acceptance = multithermal_pmf(target, mean / model.modes, model.modes);
    if (acceptance < kMinAcceptance) throw rejection_timeout_error(acceptance);
    const double photon_mean = mean / eta;
    const std::uint64_t max_attempts =
        static_cast<std::uint64_t>(std::ceil(200.0 / acceptance)) + 1000;
    for (std::uint64_t attempt = 0; attempt < max_attempts; ++attempt) {
        const std::uint64_t n = sample_multithermal(photon_mean, model.modes, rng);
        if (binomial(n, eta, rng) != target) continue;
        return interpretation == SignalEfficiency::same_as_herald ? binomial(n, eta, rng)
                                                                  : n;
    }
    throw rejection_timeout_error(acceptance);
}

std::uint64_t sample_noise(const NoiseModel& model, Rng& rng) {
    return std::visit(
        [&rng](const auto& m) -> std::uint64_t {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, noise::None>) {
                return 0;
            } else if constexpr (std::is_same_v<T, noise::Coherent>) {
                return poisson(m.mean, rng);
            } else if constexpr (std::is_same_v<T, noise::MultiThermal>) {
                return sample_multithermal(m.mean, m.modes, rng);
            } else if constexpr (std::is_same_v<T, noise::Fock>) {
                return binomial(m.photon_number, m.detection_efficiency, rng);
            } else {
                return sample_conditional_noise(m, SignalEfficiency::same_as_herald,
                                                rng);
            }
        },
        model);
}

ShotRecord sample_shot(const TwbParams& p, const NoiseModel& noise, Rng& rng) {
    const std::uint64_t n = sample_multithermal(p.mean_m / p.eta1, p.modes, rng);
    ShotRecord rec;
    rec.k1 = static_cast<std::uint32_t>(binomial(n, p.eta1, rng));
    rec.k2 = static_cast<std::uint32_t>(
        binomial(n, p.eta2 * p.transmittance, rng) + sample_noise(noise, rng));
    return rec;
}

std::vector<ShotRecord> simulate_shots(const TwbParams& p, const NoiseModel& noise,
                                       std::uint64_t shots, std::uint64_t seed,
                                       unsigned threads) {
    validate(p);
    validate(noise);
    std::vector<ShotRecord> records(shots);
    const std::uint64_t n_shards = (shots + kShardSize - 1) / kShardSize;
    const unsigned n_workers = std::max(1u, threads);

    auto run_shard = [&](std::uint64_t shard) {
        Rng rng = make_shard_rng(seed, shard);
        const std::uint64_t begin = shard * kShardSize;
        const std::uint64_t end = std::min(shots, begin + kShardSize);
        for (std::uint64_t i = begin; i < end; ++i) {
            records[i] = sample_shot(p, noise, rng);
        }
    };

    if (n_workers == 1 || n_shards <= 1) {
        for (std::uint64_t shard = 0; shard < n_shards; ++shard) run_shard(shard);
    } else {
        std::vector<std::thread> workers;
        std::atomic<std::uint64_t> next{0};
        for (unsigned w = 0; w < n_workers; ++w) {
            workers.emplace_back([&] {
                for (std::uint64_t shard = next.fetch_add(1); shard < n_shards;
                     shard = next.fetch_add(1)) {
                    run_shard(shard);
                }
            });
        }
        for (auto& worker : workers) worker.join();
    }
    return records;
}

NrfEstimate estimate_nrf(const std::vector<ShotRecord>& shots) {
    const std::size_t n = shots.size();
    if (n < 2) throw std::domain_error("estimate_nrf: need at least 2 shots");
    double sum1 = 0.0, sum2 = 0.0;
    for (const auto& rec : shots) {
        sum1 += rec.k1;
        sum2 += rec.k2;
    }
    const double mean1 = sum1 / static_cast<double>(n);
    const double mean2 = sum2 / static_cast<double>(n);
    const double s = mean1 + mean2;
    if (s == 0.0)
        throw std::domain_error("degenerate input: sample mean sum is zero");
    const double d_bar = mean1 - mean2;
    double ss = 0.0;
    for (const auto& rec : shots) {
        const double d = static_cast<double>(rec.k1) - static_cast<double>(rec.k2);
        ss += (d - d_bar) * (d - d_bar);
    }
    const double var = ss / static_cast<double>(n - 1);
    const double r = var / s;

    // Delta-method standard error from the per-shot influence values of the
    // ratio var(k1-k2) / mean(k1+k2).
    double zz = 0.0;
    for (const auto& rec : shots) {
        const double d = static_cast<double>(rec.k1) - static_cast<double>(rec.k2);
        const double w = static_cast<double>(rec.k1) + static_cast<double>(rec.k2);
        const double z = ((d - d_bar) * (d - d_bar) - var) / s - r * (w - s) / s;
        zz += z * z;
    }
    NrfEstimate est;
    est.r_hat = r;
    est.std_err = std::sqrt(zz / static_cast<double>(n - 1) / static_cast<double>(n));
    est.shots = n;
    est.mean1 = mean1;
    est.mean2 = mean2;
    return est;
}

NrfEstimate estimate_nrf(const TwbParams& p, const NoiseModel& noise,
                         std::uint64_t shots, std::uint64_t seed, unsigned threads) {
    return estimate_nrf(simulate_shots(p, noise, shots, seed, threads));
}

}  // namespace tbnrf
