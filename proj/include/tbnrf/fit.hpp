// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tbnrf/nrf.hpp"

namespace tbnrf {

enum class XRole { noise_mean, twb_mean };

struct DataPoint {
    double x = 0.0;
    double r = 0.0;
    double sigma_r = 0.0;
};

struct DataSeries {
    std::vector<DataPoint> points;
    XRole x_role = XRole::noise_mean;
};

void validate(const DataSeries& series);

enum class FitModel { coherent, thermal, fock };

/// Parameter names: mean_m, mu, eta, t, mean_noise; thermal adds mu_noise.
/// The parameter playing the x role is excluded from the fit altogether.
std::vector<std::string> model_parameters(FitModel model, XRole x_role);

struct FitSpec {
    FitModel model = FitModel::coherent;
    std::set<std::string> free;
    std::map<std::string, double> frozen;
    /// Per-parameter (lo, hi); defaults applied for missing entries:
    /// eta, t in [1e-3, 1]; mu, mu_noise in [1, 1e5]; means in [0, 1e3].
    std::map<std::string, std::pair<double, double>> bounds;
    /// Optional initial values; included as the first restart.
    std::map<std::string, double> init;
};

std::pair<double, double> default_bounds(const std::string& name);

struct FitResult {
    std::map<std::string, double> estimates;
    double chi2_nu = 0.0;
    int dof = 0;
    bool converged = false;
    int n_restarts_used = 0;
    std::vector<double> residuals;             ///< (r_i - model_i) / sigma_i
    std::vector<std::string> weakly_identified;
    std::vector<double> descent_trace;  ///< best objective after each accepted step
};

/// Model curve R(x) with the x-role parameter substituted by x.
double model_eval(FitModel model, const std::map<std::string, double>& params,
                  double x, XRole x_role);

/// Weighted least squares via multi-start Nelder-Mead (16 log-uniform starts
/// within bounds, plus the user init when given). Deterministic; restarts
/// within 1e-8 relative objective of the best are treated as ties and the
/// lowest restart index wins.
FitResult fit(const DataSeries& series, const FitSpec& spec);

/// Reduced chi-square of a fixed parameter set; n_free enters the dof.
double chi2_nu(const DataSeries& series, FitModel model,
               const std::map<std::string, double>& params, int n_free);

/// Two-stage protocol for paired clean/noisy series sharing x_role=twb_mean:
/// stage 1 fits (mu, eta, t) on the clean series with zero noise; stage 2
/// freezes those and fits only the noise parameters on the noisy series.
std::pair<FitResult, FitResult> two_stage_fit(const DataSeries& series_clean,
                                              const DataSeries& series_noisy,
                                              const FitSpec& spec);

}  // namespace tbnrf
