// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <doctest.h>

#include "tbnrf/fit.hpp"

using namespace tbnrf;

namespace {

DataSeries make_series(FitModel model, const std::map<std::string, double>& truth,
                       XRole role, double x_lo, double x_hi, int n_points,
                       double sigma, std::uint64_t seed) {
    DataSeries series;
    series.x_role = role;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> jitter(0.0, sigma);
    for (int i = 0; i < n_points; ++i) {
        const double x = x_lo + (x_hi - x_lo) * i / (n_points - 1);
        double r = model_eval(model, truth, x, role);
        if (sigma > 0.0) r += jitter(rng);
        series.points.push_back({x, r, sigma > 0.0 ? sigma : 1e-4});
    }
    return series;
}

const std::map<std::string, double> kFig5Truth{
    {"mean_m", 0.89}, {"mu", 49.93}, {"eta", 0.18}, {"t", 0.90}, {"mu_noise", 1.38}};

}  // namespace

TEST_CASE("model_eval limiting behavior") {
    // twb_mean role at t = 1: R tends to 1 - eta for large TWB means.
    std::map<std::string, double> params{
        {"mu", 100.0}, {"eta", 0.3}, {"t", 1.0}, {"mean_noise", 0.5}};
    CHECK(model_eval(FitModel::coherent, params, 1e7, XRole::twb_mean) ==
          doctest::Approx(0.7).epsilon(1e-6));

    // Coherent model is monotone nondecreasing in the noise mean and below 1.
    std::map<std::string, double> fig4{
        {"mean_m", 0.88}, {"mu", 1564.0}, {"eta", 0.19}, {"t", 0.90}};
    double prev = -1.0;
    for (double x = 0.0; x <= 5.0; x += 0.1) {
        const double r = model_eval(FitModel::coherent, fig4, x, XRole::noise_mean);
        CHECK(r >= prev);
        CHECK(r < 1.0);
        prev = r;
    }

    // Thermal model at the multithermal-noise fit parameters approaches the
    // no-noise curve for large TWB means.
    std::map<std::string, double> fig7{{"mu", 499.48}, {"eta", 0.18},     {"t", 0.87},
                                       {"mean_noise", 0.57}, {"mu_noise", 1.20}};
    std::map<std::string, double> fig7_clean = fig7;
    fig7_clean["mean_noise"] = 0.0;
    const double with_noise = model_eval(FitModel::thermal, fig7, 50.0, XRole::twb_mean);
    const double without = model_eval(FitModel::thermal, fig7_clean, 50.0, XRole::twb_mean);
    CHECK(std::abs(with_noise - without) < 5e-3);
}

TEST_CASE("chi2_nu definition") {
    std::map<std::string, double> truth{
        {"mean_m", 1.0}, {"mu", 100.0}, {"eta", 0.2}, {"t", 0.9}};
    DataSeries series = make_series(FitModel::coherent, truth, XRole::noise_mean, 0.0,
                                    2.0, 10, 0.0, 1);
    CHECK(chi2_nu(series, FitModel::coherent, truth, 2) < 1e-20);

    // Residuals equal to sigma give chi2_nu = points / dof.
    for (auto& pt : series.points) pt.r += pt.sigma_r;
    CHECK(chi2_nu(series, FitModel::coherent, truth, 2) ==
          doctest::Approx(10.0 / 8.0).epsilon(1e-9));

    CHECK_THROWS_AS(chi2_nu(series, FitModel::coherent, truth, 10),
                    std::invalid_argument);
}

TEST_CASE("noiseless round trip recovers the parameters") {
    std::map<std::string, double> truth{
        {"mean_m", 1.2}, {"mu", 80.0}, {"eta", 0.25}, {"t", 0.7}};
    const DataSeries series = make_series(FitModel::coherent, truth, XRole::noise_mean,
                                          0.0, 3.0, 20, 0.0, 2);
    FitSpec spec;
    spec.model = FitModel::coherent;
    // t is frozen alongside mu: the curve R(x) = 1 + B/(A + x) only pins two
    // combinations, so two free scale parameters are the identifiable limit.
    spec.free = {"mean_m", "eta"};
    spec.frozen = {{"mu", 80.0}, {"t", 0.7}};
    spec.init = {{"mean_m", 1.0}, {"eta", 0.3}};
    const FitResult result = fit(series, spec);
    CHECK(result.converged);
    CHECK(result.chi2_nu * result.dof < 1e-10);
    CHECK(result.estimates.at("eta") == doctest::Approx(0.25).epsilon(1e-3));
    CHECK(result.estimates.at("mean_m") == doctest::Approx(1.2).epsilon(1e-3));
}

TEST_CASE("fit invariances") {
    const DataSeries series = make_series(FitModel::thermal, kFig5Truth,
                                          XRole::noise_mean, 0.0, 2.0, 20, 0.01, 3);
    FitSpec spec;
    spec.model = FitModel::thermal;
    spec.free = {"mean_m", "eta", "t", "mu_noise"};
    spec.frozen = {{"mu", 49.93}};
    spec.init = {{"mean_m", 0.9}, {"eta", 0.2}, {"t", 0.85}, {"mu_noise", 1.5}};
    const FitResult base = fit(series, spec);

    SUBCASE("data order does not matter") {
        DataSeries shuffled = series;
        std::mt19937_64 rng(9);
        std::shuffle(shuffled.points.begin(), shuffled.points.end(), rng);
        const FitResult other = fit(shuffled, spec);
        for (const auto& [name, value] : base.estimates) {
            CHECK(other.estimates.at(name) == doctest::Approx(value).epsilon(1e-6));
        }
    }

    SUBCASE("uniform sigma scaling leaves the argmin, scales chi2_nu") {
        DataSeries scaled = series;
        for (auto& pt : scaled.points) pt.sigma_r *= 3.0;
        const FitResult other = fit(scaled, spec);
        for (const auto& [name, value] : base.estimates) {
            CHECK(other.estimates.at(name) == doctest::Approx(value).epsilon(1e-4));
        }
        CHECK(other.chi2_nu == doctest::Approx(base.chi2_nu / 9.0).epsilon(1e-3));
    }

    SUBCASE("descent trace is monotone") {
        REQUIRE(!base.descent_trace.empty());
        for (std::size_t i = 1; i < base.descent_trace.size(); ++i) {
            CHECK(base.descent_trace[i] <= base.descent_trace[i - 1] + 1e-12);
        }
    }
}

TEST_CASE("weak mu identification is flagged") {
    // Near-unit transmittance hides the imbalance term entirely.
    std::map<std::string, double> truth{
        {"mean_m", 0.88}, {"mu", 1564.0}, {"eta", 0.19}, {"t", 0.999999}};
    const DataSeries series = make_series(FitModel::coherent, truth, XRole::noise_mean,
                                          0.0, 2.0, 15, 0.0, 4);
    FitSpec spec;
    spec.model = FitModel::coherent;
    spec.free = {"mean_m", "mu", "eta", "t"};
    spec.init = {{"mean_m", 0.88}, {"mu", 1564.0}, {"eta", 0.19}, {"t", 0.999999}};
    const FitResult result = fit(series, spec);
    CHECK(std::find(result.weakly_identified.begin(), result.weakly_identified.end(),
                    "mu") != result.weakly_identified.end());
}

TEST_CASE("invalid specs are rejected") {
    const DataSeries series = make_series(
        FitModel::coherent,
        {{"mean_m", 1.0}, {"mu", 100.0}, {"eta", 0.2}, {"t", 0.9}},
        XRole::noise_mean, 0.0, 2.0, 10, 0.0, 5);
    FitSpec spec;
    spec.model = FitModel::coherent;
    spec.free = {"mean_m", "eta"};
    // "t" and "mu" neither free nor frozen.
    CHECK_THROWS_AS(fit(series, spec), std::invalid_argument);

    spec.free = {"mean_m", "eta", "t", "mu", "mean_noise"};
    CHECK_THROWS_AS(fit(series, spec), std::invalid_argument);  // x-role param free
}

TEST_CASE("two-stage protocol on a clean pair returns near-zero noise") {
    std::map<std::string, double> truth{
        {"mu", 643.12}, {"eta", 0.17}, {"t", 0.87}, {"mean_noise", 0.0}};
    const DataSeries clean = make_series(FitModel::coherent, truth, XRole::twb_mean,
                                         0.5, 6.0, 15, 0.005, 6);
    FitSpec spec;
    spec.model = FitModel::coherent;
    spec.init = {{"mu", 600.0}, {"eta", 0.2}, {"t", 0.9}, {"mean_noise", 0.1}};
    const auto [first, second] = two_stage_fit(clean, clean, spec);
    CHECK(second.estimates.at("mean_noise") < 0.05);
    CHECK(first.estimates.count("mu") == 1);
    CHECK(first.estimates.at("mean_noise") == 0.0);
}
