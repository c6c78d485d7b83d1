// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "tbnrf/fit.hpp"
#include "tbnrf/montecarlo.hpp"
#include "tbnrf/nrf.hpp"
#include "tbnrf/photon_stats.hpp"

namespace tbnrf {

class config_error : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class csv_error : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct McConfig {
    std::uint64_t shots = 0;
    std::uint64_t seed = 0;
};

struct RunConfig {
    TwbParams twb;
    NoiseModel noise;
    bool has_mc = false;
    McConfig mc;
};

/// Parses the JSON run configuration. Strict: unknown keys raise
/// config_error naming the key.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

/// Shortest round-trip decimal representation of a double.
std::string format_double(double v);

/// Inclusive start:step:stop grid; stop is included when it lands within
/// 1e-9 of a grid point. Throws config_error on bad syntax or step <= 0.
std::vector<double> parse_range(const std::string& text);

/// Reads an `x,r,sigma_r` CSV; errors name the row and column.
DataSeries read_data_series(std::istream& in, XRole x_role);
DataSeries load_data_series(const std::string& path, XRole x_role);

void write_shots_csv(std::ostream& out, const std::vector<ShotRecord>& shots);
std::vector<ShotRecord> read_shots_csv(std::istream& in);

/// Flat key=value fit report (estimates, chi2_nu, dof, converged,
/// weakly_identified).
std::string fit_report(const FitResult& result);

}  // namespace tbnrf
