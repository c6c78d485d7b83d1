// SPDX-License-Identifier: Apache-2.0
#include "tbnrf/fit.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace tbnrf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTieRelTol = 1e-8;
constexpr std::uint64_t kStartSeed = 0x74626e7266ULL;

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

std::string x_role_parameter(XRole x_role) {
    return x_role == XRole::noise_mean ? "mean_noise" : "mean_m";
}

double eval_model(FitModel model, const std::map<std::string, double>& p) {
    TwbParams twb;
    twb.mean_m = p.at("mean_m");
    twb.modes = p.at("mu");
    twb.eta1 = twb.eta2 = p.at("eta");
    twb.transmittance = p.at("t");
    switch (model) {
        case FitModel::coherent:
            return nrf_coherent(twb, p.at("mean_noise"));
        case FitModel::thermal:
            return nrf_thermal(twb, p.at("mean_noise"), p.at("mu_noise"));
        case FitModel::fock:
            return nrf_fock(twb, p.at("mean_noise"));
    }
    throw std::logic_error("unreachable");
}

struct NelderMeadResult {
    std::vector<double> x;
    double f = kInf;
    std::vector<double> trace;
};

// Standard Nelder-Mead with out-of-bounds points scored as +inf.
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             const std::vector<double>& x0,
                             const std::vector<double>& step, int max_iter) {
    const std::size_t dim = x0.size();
    std::vector<std::vector<double>> verts(dim + 1, x0);
    for (std::size_t j = 0; j < dim; ++j) verts[j + 1][j] += step[j];
    std::vector<double> fv(dim + 1);
    for (std::size_t v = 0; v <= dim; ++v) fv[v] = f(verts[v]);

    std::vector<std::size_t> order(dim + 1);
    NelderMeadResult result;
    for (int iter = 0; iter < max_iter; ++iter) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&fv](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        const double fbest = fv[order.front()];
        const double fworst = fv[order.back()];
        result.trace.push_back(fbest);
        if (std::isfinite(fworst) &&
            fworst - fbest <= 1e-12 * (std::abs(fbest) + 1e-12)) {
            break;
        }
        const std::size_t worst = order.back();
        std::vector<double> centroid(dim, 0.0);
        for (std::size_t v = 0; v <= dim; ++v) {
            if (v == worst) continue;
            for (std::size_t j = 0; j < dim; ++j) centroid[j] += verts[v][j];
        }
        for (double& c : centroid) c /= static_cast<double>(dim);

        auto blend = [&](double coeff) {
            std::vector<double> x(dim);
            for (std::size_t j = 0; j < dim; ++j)
                x[j] = centroid[j] + coeff * (centroid[j] - verts[worst][j]);
            return x;
        };
        const std::vector<double> reflected = blend(1.0);
        const double fr = f(reflected);
        const double fsecond = fv[order[dim - 1]];
        if (fr < fbest) {
            const std::vector<double> expanded = blend(2.0);
            const double fe = f(expanded);
            if (fe < fr) {
                verts[worst] = expanded;
                fv[worst] = fe;
            } else {
                verts[worst] = reflected;
                fv[worst] = fr;
            }
        } else if (fr < fsecond) {
            verts[worst] = reflected;
            fv[worst] = fr;
        } else {
            const std::vector<double> contracted = blend(fr < fv[worst] ? 0.5 : -0.5);
            const double fc = f(contracted);
            if (fc < std::min(fr, fv[worst])) {
                verts[worst] = contracted;
                fv[worst] = fc;
            } else {
                const std::size_t best = order.front();
                for (std::size_t v = 0; v <= dim; ++v) {
                    if (v == best) continue;
                    for (std::size_t j = 0; j < dim; ++j)
                        verts[v][j] = 0.5 * (verts[v][j] + verts[best][j]);
                    fv[v] = f(verts[v]);
                }
            }
        }
    }
    const auto best_it = std::min_element(fv.begin(), fv.end());
    result.f = *best_it;
    result.x = verts[static_cast<std::size_t>(best_it - fv.begin())];
    return result;
}

}  // namespace

void validate(const DataSeries& series) {
    if (series.points.size() < 2)
        throw std::invalid_argument("data series needs at least 2 points");
    for (std::size_t i = 0; i < series.points.size(); ++i) {
        if (!(series.points[i].sigma_r > 0.0))
            throw std::invalid_argument("sigma_r must be > 0 at data row " +
                                        std::to_string(i + 1));
        if (series.points[i].x < 0.0)
            throw std::invalid_argument("x must be >= 0 at data row " +
                                        std::to_string(i + 1));
    }
}

std::vector<std::string> model_parameters(FitModel model, XRole x_role) {
    std::vector<std::string> names{"mean_m", "mu", "eta", "t", "mean_noise"};
    if (model == FitModel::thermal) names.push_back("mu_noise");
    std::erase(names, x_role_parameter(x_role));
    return names;
}

std::pair<double, double> default_bounds(const std::string& name) {
    if (name == "eta" || name == "t") return {1e-3, 1.0};
    if (name == "mu" || name == "mu_noise") return {1.0, 1e5};
    if (name == "mean_m" || name == "mean_noise") return {0.0, 1e3};
    throw std::invalid_argument("unknown fit parameter: " + name);
}

double model_eval(FitModel model, const std::map<std::string, double>& params,
                  double x, XRole x_role) {
    std::map<std::string, double> full = params;
    full[x_role_parameter(x_role)] = x;
    return eval_model(model, full);
}

double chi2_nu(const DataSeries& series, FitModel model,
               const std::map<std::string, double>& params, int n_free) {
    const int dof = static_cast<int>(series.points.size()) - n_free;
    if (dof < 1)
        throw std::invalid_argument("chi2_nu: degrees of freedom must be >= 1");
    double chi2 = 0.0;
    for (const auto& pt : series.points) {
        const double res = (pt.r - model_eval(model, params, pt.x, series.x_role)) /
                           pt.sigma_r;
        chi2 += res * res;
    }
    return chi2 / dof;
}

FitResult fit(const DataSeries& series, const FitSpec& spec) {
    validate(series);
    const std::vector<std::string> names = model_parameters(spec.model, series.x_role);
    for (const auto& name : spec.free)
        require(std::find(names.begin(), names.end(), name) != names.end(),
                "free parameter not in model: " + name);
    for (const auto& [name, value] : spec.frozen) {
        require(std::find(names.begin(), names.end(), name) != names.end(),
                "frozen parameter not in model: " + name);
        require(!spec.free.count(name), "parameter both free and frozen: " + name);
        (void)value;
    }
    for (const auto& name : names)
        require(spec.free.count(name) || spec.frozen.count(name),
                "parameter neither free nor frozen: " + name);

    const std::vector<std::string> free_names(spec.free.begin(), spec.free.end());
    const std::size_t dim = free_names.size();
    require(dim >= 1, "no free parameters");
    const int dof = static_cast<int>(series.points.size()) - static_cast<int>(dim);
    require(dof >= 1, "fewer data points than free parameters");

    std::vector<std::pair<double, double>> bounds(dim);
    for (std::size_t j = 0; j < dim; ++j) {
        auto it = spec.bounds.find(free_names[j]);
        bounds[j] = it != spec.bounds.end() ? it->second
                                            : default_bounds(free_names[j]);
        require(bounds[j].first < bounds[j].second,
                "empty bounds for parameter: " + free_names[j]);
    }

    auto objective = [&](const std::vector<double>& x) -> double {
        std::map<std::string, double> params = spec.frozen;
        for (std::size_t j = 0; j < dim; ++j) {
            if (x[j] < bounds[j].first || x[j] > bounds[j].second) return kInf;
            params[free_names[j]] = x[j];
        }
        double chi2 = 0.0;
        try {
            for (const auto& pt : series.points) {
                const double r =
                    model_eval(spec.model, params, pt.x, series.x_role);
                if (!std::isfinite(r)) return kInf;
                const double res = (pt.r - r) / pt.sigma_r;
                chi2 += res * res;
            }
        } catch (const std::domain_error&) {
            return kInf;
        }
        return chi2;
    };

    // Restart 0 is the user init (when given); the rest are log-uniform draws.
    std::vector<std::vector<double>> starts;
    if (!spec.init.empty()) {
        std::vector<double> x0(dim);
        for (std::size_t j = 0; j < dim; ++j) {
            auto it = spec.init.find(free_names[j]);
            x0[j] = it != spec.init.end()
                        ? it->second
                        : std::sqrt(std::max(bounds[j].first, 1e-3) * bounds[j].second);
            x0[j] = std::clamp(x0[j], bounds[j].first, bounds[j].second);
        }
        starts.push_back(std::move(x0));
    }
    std::mt19937_64 rng(kStartSeed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int k = 0; k < 16; ++k) {
        std::vector<double> x0(dim);
        for (std::size_t j = 0; j < dim; ++j) {
            const double lo = std::max(bounds[j].first, 1e-3);
            const double hi = bounds[j].second;
            x0[j] = lo * std::pow(hi / lo, unit(rng));
        }
        starts.push_back(std::move(x0));
    }

    std::vector<NelderMeadResult> runs;
    runs.reserve(starts.size());
    const int max_iter = 400 * static_cast<int>(dim) + 400;
    for (const auto& x0 : starts) {
        // Chain three simplex rounds with shrinking initial steps; re-seeding
        // the simplex at the incumbent polishes stalls so that restarts that
        // reach the same basin agree in objective to tie tolerance.
        NelderMeadResult run;
        std::vector<double> x_cur = x0;
        for (const double scale : {0.01, 0.002, 0.0005}) {
            std::vector<double> step(dim);
            for (std::size_t j = 0; j < dim; ++j) {
                step[j] = scale * std::abs(x_cur[j]);
                if (step[j] == 0.0)
                    step[j] = 0.2 * scale * (bounds[j].second - bounds[j].first);
                // Keep the initial simplex inside the box.
                if (x_cur[j] + step[j] > bounds[j].second) step[j] = -step[j];
            }
            NelderMeadResult round = nelder_mead(objective, x_cur, step, max_iter);
            run.trace.insert(run.trace.end(), round.trace.begin(), round.trace.end());
            if (round.f <= run.f) {
                run.f = round.f;
                run.x = round.x;
            }
            x_cur = run.x;
        }
        runs.push_back(std::move(run));
    }

    double fmin = kInf;
    for (const auto& run : runs) fmin = std::min(fmin, run.f);
    std::size_t winner = 0;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        if (runs[i].f <= fmin + kTieRelTol * (std::abs(fmin) + 1e-12)) {
            winner = i;
            break;
        }
    }

    std::vector<double> objectives;
    for (const auto& run : runs) objectives.push_back(run.f);
    std::sort(objectives.begin(), objectives.end());
    const bool converged =
        std::isfinite(fmin) &&
        (objectives.size() < 2 ||
         objectives[1] - objectives[0] <=
             kTieRelTol * (std::abs(objectives[0]) + 1e-12));

    // Degenerate models leave exactly flat parameter combinations that the
    // data cannot pin down; a simplex walk ends at an arbitrary point of that
    // ridge. Polish the winner against a proximal objective anchored at the
    // user init so that flat directions settle at the nearest ridge point to
    // the init, at a chi-square cost bounded by 0.1% of the minimum. The
    // weight scales with the objective, so uniform sigma rescaling leaves the
    // polished point unchanged.
    if (!spec.init.empty() && std::isfinite(runs[winner].f)) {
        const std::vector<double>& x_ref = starts.front();
        auto dist2 = [&](const std::vector<double>& x) {
            double d = 0.0;
            for (std::size_t j = 0; j < dim; ++j) {
                const double s = std::max(std::abs(x_ref[j]),
                                          1e-3 * (bounds[j].second - bounds[j].first));
                const double u = (x[j] - x_ref[j]) / s;
                d += u * u;
            }
            return d;
        };
        const double budget =
            runs[winner].f + 1e-3 * (runs[winner].f + 1e-12);
        std::vector<double> xp = runs[winner].x;
        // The ridge is a narrow curved valley; anneal the pull by refreshing
        // the weight as the distance shrinks so the walk keeps moving.
        for (int round = 0; round < 8; ++round) {
            const double d0 = dist2(xp);
            if (d0 < 1e-12) break;
            const double kappa = 1e-3 * (runs[winner].f + 1e-12) / d0;
            auto proximal = [&](const std::vector<double>& x) {
                const double chi2 = objective(x);
                return std::isfinite(chi2) ? chi2 + kappa * dist2(x) : kInf;
            };
            std::vector<double> x_round = xp;
            double f_round = proximal(x_round);
            for (const double scale : {0.05, 0.01, 0.002}) {
                std::vector<double> step(dim);
                for (std::size_t j = 0; j < dim; ++j) {
                    step[j] = scale * std::abs(x_round[j]);
                    if (step[j] == 0.0)
                        step[j] = 0.2 * scale * (bounds[j].second - bounds[j].first);
                    if (x_round[j] + step[j] > bounds[j].second) step[j] = -step[j];
                }
                const NelderMeadResult r = nelder_mead(proximal, x_round, step, max_iter);
                if (r.f < f_round) {
                    f_round = r.f;
                    x_round = r.x;
                }
            }
            if (objective(x_round) > budget || dist2(x_round) >= d0 - 1e-10) {
                break;
            }
            xp = x_round;
        }
        const double chi2_polished = objective(xp);
        if (chi2_polished <= budget) {
            runs[winner].x = xp;
            runs[winner].f = chi2_polished;
        }
    }

    FitResult result;
    result.estimates = spec.frozen;
    for (std::size_t j = 0; j < dim; ++j)
        result.estimates[free_names[j]] = runs[winner].x[j];
    result.dof = dof;
    result.chi2_nu = runs[winner].f / dof;
    result.converged = converged;
    result.n_restarts_used = static_cast<int>(runs.size());
    result.descent_trace = runs[winner].trace;
    for (const auto& pt : series.points) {
        result.residuals.push_back(
            (pt.r - model_eval(spec.model, result.estimates, pt.x, series.x_role)) /
            pt.sigma_r);
    }

    // Flag mu when the imbalance term is invisible at the fitted point.
    if (spec.free.count("mu")) {
        double r_lo = kInf, r_hi = -kInf, term_max = 0.0;
        for (const auto& pt : series.points) {
            std::map<std::string, double> full = result.estimates;
            full[x_role_parameter(series.x_role)] = pt.x;
            const double r = eval_model(spec.model, full);
            r_lo = std::min(r_lo, r);
            r_hi = std::max(r_hi, r);
            const double m = full.at("mean_m");
            const double t = full.at("t");
            const double denom = (1.0 + t) * m + full.at("mean_noise");
            if (denom > 0.0) {
                term_max = std::max(
                    term_max, (1.0 - t) * (1.0 - t) * m * m / (full.at("mu") * denom));
            }
        }
        if (term_max < 1e-6 * (r_hi - r_lo)) result.weakly_identified.push_back("mu");
    }
    return result;
}

std::pair<FitResult, FitResult> two_stage_fit(const DataSeries& series_clean,
                                              const DataSeries& series_noisy,
                                              const FitSpec& spec) {
    require(series_clean.x_role == XRole::twb_mean &&
                series_noisy.x_role == XRole::twb_mean,
            "two_stage_fit requires x_role=twb_mean for both series");

    FitSpec stage1;
    stage1.model = spec.model;
    for (const char* name : {"mu", "eta", "t"}) {
        if (auto it = spec.frozen.find(name); it != spec.frozen.end()) {
            stage1.frozen[name] = it->second;
        } else {
            stage1.free.insert(name);
        }
    }
    stage1.frozen["mean_noise"] = 0.0;
    if (spec.model == FitModel::thermal) stage1.frozen["mu_noise"] = 1.0;
    stage1.bounds = spec.bounds;
    for (const auto& [name, value] : spec.init) {
        if (stage1.free.count(name)) stage1.init[name] = value;
    }
    const FitResult first = fit(series_clean, stage1);

    FitSpec stage2;
    stage2.model = spec.model;
    stage2.free.insert("mean_noise");
    if (spec.model == FitModel::thermal) stage2.free.insert("mu_noise");
    for (const char* name : {"mu", "eta", "t"}) stage2.frozen[name] = first.estimates.at(name);
    stage2.bounds = spec.bounds;
    for (const auto& [name, value] : spec.init) {
        if (stage2.free.count(name)) stage2.init[name] = value;
    }
    const FitResult second = fit(series_noisy, stage2);
    return {first, second};
}

}  // namespace tbnrf
