// SPDX-License-Identifier: Apache-2.0
#include "tbnrf/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <optional>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace tbnrf {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& scope,
                std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        bool known = false;
        for (const char* name : allowed) {
            if (key == name) {
                known = true;
                break;
            }
        }
        if (!known) throw config_error("unknown config key: " + scope + "." + key);
    }
}

double get_number(const json& obj, const std::string& scope, const char* key,
                  std::optional<double> fallback = std::nullopt) {
    if (!obj.contains(key)) {
        if (fallback) return *fallback;
        throw config_error("missing config key: " + scope + "." + key);
    }
    if (!obj.at(key).is_number())
        throw config_error("config key is not a number: " + scope + "." + key);
    return obj.at(key).get<double>();
}

std::uint64_t get_unsigned(const json& obj, const std::string& scope, const char* key) {
    if (!obj.contains(key)) throw config_error("missing config key: " + scope + "." + key);
    if (!obj.at(key).is_number_unsigned())
        throw config_error("config key is not a nonnegative integer: " + scope + "." + key);
    return obj.at(key).get<std::uint64_t>();
}

NoiseModel parse_noise(const json& obj) {
    if (!obj.contains("kind") || !obj.at("kind").is_string())
        throw config_error("missing config key: noise.kind");
    const std::string kind = obj.at("kind").get<std::string>();
    if (kind == "none") {
        check_keys(obj, "noise", {"kind"});
        return noise::None{};
    }
    if (kind == "coherent") {
        check_keys(obj, "noise", {"kind", "mean"});
        return noise::Coherent{get_number(obj, "noise", "mean")};
    }
    if (kind == "thermal") {
        check_keys(obj, "noise", {"kind", "mean", "modes"});
        return noise::MultiThermal{get_number(obj, "noise", "mean"),
                                   get_number(obj, "noise", "modes")};
    }
    if (kind == "fock") {
        check_keys(obj, "noise", {"kind", "photon_number", "detection_efficiency"});
        return noise::Fock{get_unsigned(obj, "noise", "photon_number"),
                           get_number(obj, "noise", "detection_efficiency")};
    }
    if (kind == "conditional") {
        check_keys(obj, "noise",
                   {"kind", "unconditioned_mean", "modes", "herald_value",
                    "herald_efficiency"});
        return noise::Conditional{get_number(obj, "noise", "unconditioned_mean"),
                                  get_number(obj, "noise", "modes"),
                                  get_unsigned(obj, "noise", "herald_value"),
                                  get_number(obj, "noise", "herald_efficiency")};
    }
    throw config_error("unknown noise.kind: " + kind);
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw config_error(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw config_error("config root must be an object");
    check_keys(doc, "<root>", {"twb", "noise", "mc"});
    if (!doc.contains("twb")) throw config_error("missing config key: twb");

    RunConfig cfg;
    const json& twb = doc.at("twb");
    check_keys(twb, "twb", {"mean", "modes", "eta1", "eta2", "transmittance"});
    cfg.twb.mean_m = get_number(twb, "twb", "mean");
    cfg.twb.modes = get_number(twb, "twb", "modes");
    cfg.twb.eta1 = get_number(twb, "twb", "eta1");
    cfg.twb.eta2 = get_number(twb, "twb", "eta2");
    cfg.twb.transmittance = get_number(twb, "twb", "transmittance", 1.0);

    cfg.noise = doc.contains("noise") ? parse_noise(doc.at("noise"))
                                      : NoiseModel{noise::None{}};
    if (doc.contains("mc")) {
        const json& mc = doc.at("mc");
        check_keys(mc, "mc", {"shots", "seed"});
        cfg.has_mc = true;
        cfg.mc.shots = get_unsigned(mc, "mc", "shots");
        cfg.mc.seed = get_unsigned(mc, "mc", "seed");
        if (cfg.mc.shots == 0) throw config_error("mc.shots must be positive");
    }

    try {
        validate(cfg.twb);
        validate(cfg.noise);
    } catch (const std::domain_error& e) {
        throw config_error(e.what());
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::vector<double> parse_range(const std::string& text) {
    double start = 0.0, step = 0.0, stop = 0.0;
    std::array<double*, 3> slots{&start, &step, &stop};
    std::size_t pos = 0;
    for (int i = 0; i < 3; ++i) {
        const std::size_t next = i < 2 ? text.find(':', pos) : text.size();
        if (next == std::string::npos)
            throw config_error("bad range syntax (want start:step:stop): " + text);
        const std::string field = text.substr(pos, next - pos);
        const auto res =
            std::from_chars(field.data(), field.data() + field.size(), *slots[i]);
        if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
            throw config_error("bad range number '" + field + "' in: " + text);
        pos = next + 1;
    }
    if (!(step > 0.0)) throw config_error("range step must be > 0: " + text);
    std::vector<double> grid;
    for (std::uint64_t k = 0;; ++k) {
        const double v = start + static_cast<double>(k) * step;
        if (v > stop + 1e-9) break;
        grid.push_back(v);
    }
    return grid;
}

DataSeries read_data_series(std::istream& in, XRole x_role) {
    DataSeries series;
    series.x_role = x_role;
    std::string line;
    if (!std::getline(in, line)) throw csv_error("empty data file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "x,r,sigma_r")
        throw csv_error("bad data header, expected 'x,r,sigma_r', got '" + line + "'");
    std::size_t row = 1;
    static const char* kCols[3] = {"x", "r", "sigma_r"};
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        double vals[3];
        std::size_t pos = 0;
        for (int c = 0; c < 3; ++c) {
            const std::size_t next = c < 2 ? line.find(',', pos) : line.size();
            if (next == std::string::npos)
                throw csv_error("row " + std::to_string(row) + ": missing column " +
                                kCols[c]);
            const std::string field = line.substr(pos, next - pos);
            const auto res =
                std::from_chars(field.data(), field.data() + field.size(), vals[c]);
            if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
                throw csv_error("row " + std::to_string(row) + ", column " + kCols[c] +
                                ": not a number: '" + field + "'");
            pos = next + 1;
        }
        if (!(vals[2] > 0.0))
            throw csv_error("row " + std::to_string(row) +
                            ": sigma_r must be > 0");
        series.points.push_back({vals[0], vals[1], vals[2]});
    }
    if (series.points.size() < 2) throw csv_error("data file needs at least 2 rows");
    return series;
}

DataSeries load_data_series(const std::string& path, XRole x_role) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open data file: " + path);
    return read_data_series(in, x_role);
}

void write_shots_csv(std::ostream& out, const std::vector<ShotRecord>& shots) {
    out << "k1,k2\n";
    for (const auto& rec : shots) out << rec.k1 << ',' << rec.k2 << '\n';
}

std::vector<ShotRecord> read_shots_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw csv_error("empty shots file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "k1,k2")
        throw csv_error("bad shots header, expected 'k1,k2', got '" + line + "'");
    std::vector<ShotRecord> shots;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos)
            throw csv_error("row " + std::to_string(row) + ": missing column k2");
        ShotRecord rec;
        const auto r1 = std::from_chars(line.data(), line.data() + comma, rec.k1);
        const auto r2 =
            std::from_chars(line.data() + comma + 1, line.data() + line.size(), rec.k2);
        if (r1.ec != std::errc{} || r2.ec != std::errc{} ||
            r2.ptr != line.data() + line.size())
            throw csv_error("row " + std::to_string(row) + ": not an integer pair");
        shots.push_back(rec);
    }
    return shots;
}

std::string fit_report(const FitResult& result) {
    std::ostringstream os;
    for (const auto& [name, value] : result.estimates)
        os << name << '=' << format_double(value) << '\n';
    os << "chi2_nu=" << format_double(result.chi2_nu) << '\n';
    os << "dof=" << result.dof << '\n';
    os << "converged=" << (result.converged ? "true" : "false") << '\n';
    os << "n_restarts_used=" << result.n_restarts_used << '\n';
    os << "weakly_identified=";
    for (std::size_t i = 0; i < result.weakly_identified.size(); ++i) {
        if (i) os << ';';
        os << result.weakly_identified[i];
    }
    os << '\n';
    return os.str();
}

}  // namespace tbnrf
