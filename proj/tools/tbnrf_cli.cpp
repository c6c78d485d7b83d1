// SPDX-License-Identifier: Apache-2.0
//
// tbnrf: noise reduction factor calculator for mesoscopic twin beams in
// noisy lossy channels. Subcommands: nrf, scan, simulate, fit, threshold.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "tbnrf/fit.hpp"
#include "tbnrf/io.hpp"
#include "tbnrf/montecarlo.hpp"
#include "tbnrf/nrf.hpp"
#include "tbnrf/thresholds.hpp"

namespace {

using namespace tbnrf;

unsigned resolve_threads() {
    if (const char* env = std::getenv("TBNRF_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v < 1) throw config_error("TBNRF_THREADS must be a positive integer");
        return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

const char* classification_name(Classification c) {
    switch (c) {
        case Classification::nonclassical: return "nonclassical";
        case Classification::classical: return "classical";
        default: return "boundary";
    }
}

/// Noise moments with the model's mean-like knob set to x (used by scans).
MomentPair moments_at(const NoiseModel& model, double x) {
    return std::visit(
        [x](const auto& m) -> MomentPair {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, noise::None>) {
                return {0.0, 0.0};
            } else if constexpr (std::is_same_v<T, noise::Coherent>) {
                return {x, x};
            } else if constexpr (std::is_same_v<T, noise::MultiThermal>) {
                return {x, x * (x / m.modes + 1.0)};
            } else if constexpr (std::is_same_v<T, noise::Fock>) {
                // x is the detected Fock mean.
                return {x, (1.0 - m.detection_efficiency) * x};
            } else {
                noise::Conditional scaled = m;
                scaled.unconditioned_mean = x;
                return noise_moments(NoiseModel{scaled});
            }
        },
        model);
}

int cmd_nrf(const std::string& config_path) {
    const RunConfig cfg = load_config(config_path);
    const NrfTerms terms = nrf_terms(cfg.twb, cfg.noise);
    const double r = terms.total();
    std::cout << "R=" << format_double(r) << '\n'
              << "classification=" << classification_name(classify(cfg.twb, cfg.noise))
              << '\n'
              << "term_shot_noise=1\n"
              << "term_correlation=" << format_double(terms.correlation) << '\n'
              << "term_imbalance=" << format_double(terms.imbalance) << '\n'
              << "term_excess_noise=" << format_double(terms.excess) << '\n';
    return 0;
}

int cmd_scan(const std::string& config_path, const std::string& twb_range,
             const std::string& noise_range, const std::string& out_path) {
    const RunConfig cfg = load_config(config_path);
    const std::vector<double> twb_means = parse_range(twb_range);
    const std::vector<double> noise_means = parse_range(noise_range);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::ios_base::failure("cannot open output file: " + out_path);
    out << "mean_twb,mean_noise,r\n";
    for (const double m : twb_means) {
        for (const double mn : noise_means) {
            const double t = cfg.twb.transmittance;
            const double r =
                nrf_noisy_one_arm(m, t * m, cfg.twb.eta1, cfg.twb.eta2 * t,
                                  cfg.twb.modes, moments_at(cfg.noise, mn));
            out << format_double(m) << ',' << format_double(mn) << ','
                << format_double(r) << '\n';
        }
    }
    if (!out) throw std::ios_base::failure("failed writing output file: " + out_path);
    return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& out_path,
                 bool estimate) {
    const RunConfig cfg = load_config(config_path);
    if (!cfg.has_mc) throw config_error("missing config key: mc");
    const unsigned threads = resolve_threads();
    if (estimate) {
        const NrfEstimate est =
            estimate_nrf(cfg.twb, cfg.noise, cfg.mc.shots, cfg.mc.seed, threads);
        std::cout << "r_hat=" << format_double(est.r_hat) << '\n'
                  << "std_err=" << format_double(est.std_err) << '\n'
                  << "shots=" << est.shots << '\n'
                  << "mean1=" << format_double(est.mean1) << '\n'
                  << "mean2=" << format_double(est.mean2) << '\n'
                  << "r_analytic=" << format_double(nrf_noisy_lossy(cfg.twb, cfg.noise))
                  << '\n';
        return 0;
    }
    const auto shots = simulate_shots(cfg.twb, cfg.noise, cfg.mc.shots, cfg.mc.seed, threads);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::ios_base::failure("cannot open output file: " + out_path);
    write_shots_csv(out, shots);
    if (!out) throw std::ios_base::failure("failed writing output file: " + out_path);
    return 0;
}

std::map<std::string, double> parse_assignments(const std::vector<std::string>& items,
                                                const char* what) {
    std::map<std::string, double> out;
    for (const auto& item : items) {
        const std::size_t eq = item.find('=');
        if (eq == std::string::npos)
            throw config_error(std::string("bad ") + what +
                               " assignment (want name=value): " + item);
        try {
            out[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
        } catch (const std::exception&) {
            throw config_error(std::string("bad ") + what + " assignment: " + item);
        }
    }
    return out;
}

int cmd_fit(const std::string& data_path, const std::string& model_name,
            const std::string& x_role_name, const std::vector<std::string>& free_list,
            const std::vector<std::string>& frozen_list,
            const std::vector<std::string>& init_list, const std::string& out_path,
            const std::string& two_stage_clean) {
    FitSpec spec;
    if (model_name == "coherent") spec.model = FitModel::coherent;
    else if (model_name == "thermal") spec.model = FitModel::thermal;
    else if (model_name == "fock") spec.model = FitModel::fock;
    else throw config_error("unknown model: " + model_name);

    XRole role;
    if (x_role_name == "noise_mean") role = XRole::noise_mean;
    else if (x_role_name == "twb_mean") role = XRole::twb_mean;
    else throw config_error("unknown x-role: " + x_role_name);

    spec.free.insert(free_list.begin(), free_list.end());
    spec.frozen = parse_assignments(frozen_list, "frozen");
    spec.init = parse_assignments(init_list, "init");

    std::string report;
    bool converged = true;
    if (!two_stage_clean.empty()) {
        const DataSeries clean = load_data_series(two_stage_clean, role);
        const DataSeries noisy = load_data_series(data_path, role);
        const auto [first, second] = two_stage_fit(clean, noisy, spec);
        report = "# stage 1 (no noise)\n" + fit_report(first) +
                 "# stage 2 (noise parameters)\n" + fit_report(second);
        converged = first.converged && second.converged;
    } else {
        const DataSeries series = load_data_series(data_path, role);
        if (spec.free.empty()) {
            for (const auto& name : model_parameters(spec.model, role)) {
                if (!spec.frozen.count(name)) spec.free.insert(name);
            }
        }
        const FitResult result = fit(series, spec);
        report = fit_report(result);
        converged = result.converged;
    }
    if (!out_path.empty()) {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw std::ios_base::failure("cannot open output file: " + out_path);
        out << report;
    }
    std::cout << report;
    if (!converged) {
        std::cerr << "fit did not converge (best point reported)\n";
        return 3;
    }
    return 0;
}

int cmd_threshold(double eta, double mu, double mean_m, const std::optional<double>& t,
                  const std::optional<double>& mu_noise) {
    std::cout << "t_min=" << format_double(t_min(eta, mu, mean_m)) << '\n';
    if (t && mu_noise) {
        const ThresholdReport rep = thermal_noise_max(eta, *t, mu, mean_m, *mu_noise);
        if (rep.feasible) {
            std::cout << "thermal_noise_max=" << format_double(*rep.value) << '\n';
        } else {
            std::cout << "thermal_noise_max=infeasible\n";
        }
    }
    if (t) {
        const ThresholdReport rep = fock_noise_threshold(eta, *t, mu, mean_m);
        if (rep.kind == ThresholdKind::none_required) {
            std::cout << "fock_noise_min=none_required\n";
        } else {
            std::cout << "fock_noise_min=" << format_double(*rep.value) << '\n';
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Noise reduction factor of mesoscopic twin beams in noisy channels"};
    app.require_subcommand(1);

    std::string config_path, out_path, twb_range, noise_range;
    std::string data_path, model_name = "coherent", x_role_name = "noise_mean";
    std::string two_stage_clean;
    std::vector<std::string> free_list, frozen_list, init_list;
    bool estimate = false;
    double eta = 0.0, mu = 0.0, mean_m = 0.0;
    std::optional<double> t_opt, mu_noise_opt;

    auto* nrf_cmd = app.add_subcommand("nrf", "Evaluate R and its term breakdown");
    nrf_cmd->add_option("--config", config_path)->required();

    auto* scan_cmd = app.add_subcommand("scan", "R over a (TWB mean, noise mean) grid");
    scan_cmd->add_option("--config", config_path)->required();
    scan_cmd->add_option("--twb-mean", twb_range, "start:step:stop")->required();
    scan_cmd->add_option("--noise-mean", noise_range, "start:step:stop")->required();
    scan_cmd->add_option("--out", out_path)->required();

    auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo photon counting");
    sim_cmd->add_option("--config", config_path)->required();
    sim_cmd->add_option("--out", out_path, "write k1,k2 shots CSV");
    sim_cmd->add_flag("--estimate", estimate, "print the NRF estimate instead");

    auto* fit_cmd = app.add_subcommand("fit", "Weighted least-squares fit of an R series");
    fit_cmd->add_option("--data", data_path, "CSV with header x,r,sigma_r")->required();
    fit_cmd->add_option("--model", model_name, "coherent|thermal|fock");
    fit_cmd->add_option("--x-role", x_role_name, "noise_mean|twb_mean");
    fit_cmd->add_option("--free", free_list, "free parameter names");
    fit_cmd->add_option("--frozen", frozen_list, "name=value");
    fit_cmd->add_option("--init", init_list, "name=value");
    fit_cmd->add_option("--out", out_path, "report file");
    fit_cmd->add_option("--two-stage", two_stage_clean,
                        "no-noise CSV for the two-stage protocol");

    auto* thr_cmd = app.add_subcommand("threshold", "Nonclassicality survival bounds");
    thr_cmd->add_option("--eta", eta)->required();
    thr_cmd->add_option("--mu", mu)->required();
    thr_cmd->add_option("--mean", mean_m)->required();
    thr_cmd->add_option("--t", t_opt);
    thr_cmd->add_option("--mu-noise", mu_noise_opt);

    try {
        app.parse(argc, argv);
        if (nrf_cmd->parsed()) return cmd_nrf(config_path);
        if (scan_cmd->parsed()) return cmd_scan(config_path, twb_range, noise_range, out_path);
        if (sim_cmd->parsed()) {
            if (!estimate && out_path.empty())
                throw config_error("simulate needs --out or --estimate");
            return cmd_simulate(config_path, out_path, estimate);
        }
        if (fit_cmd->parsed())
            return cmd_fit(data_path, model_name, x_role_name, free_list, frozen_list,
                           init_list, out_path, two_stage_clean);
        if (thr_cmd->parsed()) return cmd_threshold(eta, mu, mean_m, t_opt, mu_noise_opt);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const rejection_timeout_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const config_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const csv_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
