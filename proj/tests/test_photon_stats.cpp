// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <stdexcept>
#include <random>
#include <vector>

#include <doctest.h>

#include "tbnrf/photon_stats.hpp"

using namespace tbnrf;

namespace {

// Direct-summation oracle: pmf truncated where the cumulative mass
// reaches 1 - 1e-12.
struct PmfSummary {
    double total = 0.0;
    double mean = 0.0;
    double second = 0.0;
    double variance() const { return second - mean * mean; }
};

PmfSummary summarize(double mean_per_mode, double modes) {
    PmfSummary s;
    for (std::uint64_t n = 0; n < 2000000; ++n) {
        const double p = multithermal_pmf(n, mean_per_mode, modes);
        s.total += p;
        s.mean += static_cast<double>(n) * p;
        s.second += static_cast<double>(n) * static_cast<double>(n) * p;
        if (s.total >= 1.0 - 1e-12) break;
    }
    return s;
}

}  // namespace

TEST_CASE("multithermal pmf single-mode values") {
    CHECK(multithermal_pmf(0, 1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(multithermal_pmf(0, 1.0, 2.0) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("multithermal pmf matches two-geometric convolution") {
    // Two equally populated modes: convolution of two geometric laws.
    const double m = 0.5;
    auto geometric = [m](std::uint64_t k) {
        return 1.0 / (m + 1.0) * std::pow(m / (m + 1.0), static_cast<double>(k));
    };
    for (std::uint64_t n : {0, 1, 2, 3, 7}) {
        double expected = 0.0;
        for (std::uint64_t k = 0; k <= n; ++k) expected += geometric(k) * geometric(n - k);
        CHECK(multithermal_pmf(n, m, 2.0) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("multithermal pmf normalization and moments") {
    for (auto [mean, modes] : std::vector<std::pair<double, double>>{
             {1.0, 1.0}, {0.3, 2.0}, {2.5, 1.38}, {0.05, 100.0}, {4.0, 3.7}}) {
        const PmfSummary s = summarize(mean, modes);
        CHECK(s.total == doctest::Approx(1.0).epsilon(1e-9));
        const double total_mean = modes * mean;
        CHECK(s.mean == doctest::Approx(total_mean).epsilon(1e-8));
        CHECK(s.variance() ==
              doctest::Approx(total_mean * (total_mean / modes + 1.0)).epsilon(1e-7));
    }
}

TEST_CASE("multithermal pmf domain errors") {
    CHECK_THROWS_AS(multithermal_pmf(0, 0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(multithermal_pmf(0, -1.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(multithermal_pmf(0, 1.0, 0.5), std::domain_error);
}

TEST_CASE("bernoulli detected moments") {
    const MomentPair lossless = bernoulli_detected_moments({5.0, 0.0}, 1.0);
    CHECK(lossless.mean == 5.0);
    CHECK(lossless.variance == 0.0);

    const MomentPair fock = bernoulli_detected_moments({5.0, 0.0}, 0.4);
    CHECK(fock.mean == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(fock.variance == doctest::Approx(1.2).epsilon(1e-15));

    const MomentPair thermal = bernoulli_detected_moments({2.0, 6.0}, 0.17);
    CHECK(thermal.mean == doctest::Approx(0.34).epsilon(1e-15));
    CHECK(thermal.variance == doctest::Approx(0.4556).epsilon(1e-12));

    CHECK_THROWS_AS(bernoulli_detected_moments({1.0, 1.0}, 1.5), std::domain_error);
    CHECK_THROWS_AS(bernoulli_detected_moments({1.0, 1.0}, -0.1), std::domain_error);
}

TEST_CASE("bernoulli detected moments vs Monte Carlo thinning") {
    // A single-mode thermal state with mean 2 has variance 6, matching the
    // (2, 6) moment example; thin it at 0.17 and compare empirically.
    std::mt19937_64 rng(12345);
    std::exponential_distribution<double> intensity(1.0 / 2.0);
    const double eta = 0.17;
    const std::size_t n_draws = 400000;
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i < n_draws; ++i) {
        std::poisson_distribution<std::uint64_t> photon(intensity(rng));
        const std::uint64_t n = photon(rng);
        std::uint64_t k = 0;
        std::bernoulli_distribution keep(eta);
        for (std::uint64_t j = 0; j < n; ++j) k += keep(rng);
        sum += static_cast<double>(k);
        sum2 += static_cast<double>(k) * static_cast<double>(k);
    }
    const double mean = sum / n_draws;
    const double var = sum2 / n_draws - mean * mean;
    const MomentPair expected = bernoulli_detected_moments({2.0, 6.0}, eta);
    // Standard errors: ~sqrt(var/n) for the mean, a safe inflation for the var.
    CHECK(std::abs(mean - expected.mean) < 5.0 * std::sqrt(expected.variance / n_draws));
    CHECK(std::abs(var - expected.variance) < 5.0 * 3.0 * expected.variance / std::sqrt(n_draws));
}

TEST_CASE("thinning composes multiplicatively") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const MomentPair in{10.0 * unit(rng), 20.0 * unit(rng)};
        const double ea = unit(rng), eb = unit(rng);
        const MomentPair twice =
            bernoulli_detected_moments(bernoulli_detected_moments(in, ea), eb);
        const MomentPair once = bernoulli_detected_moments(in, ea * eb);
        CHECK(twice.mean == doctest::Approx(once.mean).epsilon(1e-12));
        CHECK(std::abs(twice.variance - once.variance) < 1e-12);
    }
}

TEST_CASE("noise moments") {
    const MomentPair none = noise_moments(noise::None{});
    CHECK(none.mean == 0.0);
    CHECK(none.variance == 0.0);

    const MomentPair coh = noise_moments(noise::Coherent{0.87});
    CHECK(coh.mean == 0.87);
    CHECK(coh.variance == 0.87);

    const MomentPair th = noise_moments(noise::MultiThermal{0.57, 1.20});
    CHECK(th.mean == doctest::Approx(0.57).epsilon(1e-15));
    CHECK(th.variance == doctest::Approx(0.84075).epsilon(1e-12));

    const MomentPair fock = noise_moments(noise::Fock{5, 0.4});
    CHECK(fock.mean == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(fock.variance == doctest::Approx(1.2).epsilon(1e-15));
}

TEST_CASE("conditional noise with perfect heralding pins the count") {
    for (std::uint64_t m_cond : {0, 1, 5, 20}) {
        const MomentPair mp =
            noise_moments(noise::Conditional{3.0, 10.0, m_cond, 1.0});
        CHECK(mp.mean == doctest::Approx(static_cast<double>(m_cond)).epsilon(1e-14));
        CHECK(mp.variance == 0.0);
    }
}

TEST_CASE("noise model validation") {
    CHECK_THROWS_AS(noise_moments(noise::Coherent{-1.0}), std::domain_error);
    CHECK_THROWS_AS(noise_moments(noise::MultiThermal{1.0, 0.5}), std::domain_error);
    CHECK_THROWS_AS(noise_moments(noise::Fock{1, 1.5}), std::domain_error);
    CHECK_THROWS_AS(noise_moments(noise::Conditional{1.0, 0.5, 1, 0.5}),
                    std::domain_error);
}
