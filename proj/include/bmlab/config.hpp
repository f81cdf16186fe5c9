#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "bmlab/errors.hpp"

namespace bmlab {

inline constexpr const char* kVersion = "1.0.0";

// One experiment run = one config. The file form is plain `key = value`
// lines ('#' comments allowed) and round-trips losslessly, doubles included.
struct ExperimentConfig {
    std::string experiment = "all";  // confluence|dimension|cutlocus|stars|networks|probe|all
    std::uint32_t n = 1000;          // quadrangulation size (edges of the tree)
    std::uint64_t m = 1024;          // excursion resolution (snake runs)
    std::uint32_t seeds = 1;         // number of maps / label fields in the batch
    std::uint64_t seed_base = 1;     // seed of batch item i is seed_base + i
    std::size_t samples = 200;       // per-map statistic sample count
    double eps = 0.3;                // separation scale, fraction of the diameter
    double beta = 0.1;               // near-endpoint resolution delta = beta n^(1/4)
    double tol = 0.0;                // tree-equivalence tolerance; 0 = resolution default
    double fit_lo = 0.0;             // scaling-fit window; 0 = automatic
    double fit_hi = 0.0;
    std::size_t cap = 64;            // geodesic enumeration cap
    bool oracle = false;             // cross-check against exact references where offered
    std::string out_dir = "results";

    void validate() const;
    std::string to_string() const;
    static ExperimentConfig parse(const std::string& text);
    void save(const std::string& path) const;
    static ExperimentConfig load(const std::string& path);
};

namespace detail {

inline bool known_experiment(std::string_view e) {
    constexpr std::array names{"confluence", "dimension", "cutlocus", "stars",
                               "networks",   "probe",     "all"};
    for (const char* x : names) {
        if (e == x) return true;
    }
    return false;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

// Shortest representation that parses back to the identical double.
inline std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

inline std::uint64_t parse_u64(std::string_view key, std::string_view v) {
    std::uint64_t out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
        throw ConfigError("config: bad integer for '" + std::string(key) + "': " +
                          std::string(v));
    }
    return out;
}

inline double parse_f64(std::string_view key, std::string_view v) {
    double out = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
        throw ConfigError("config: bad number for '" + std::string(key) + "': " +
                          std::string(v));
    }
    return out;
}

}  // namespace detail

inline void ExperimentConfig::validate() const {
    if (!detail::known_experiment(experiment)) {
        throw ConfigError("config: unknown experiment '" + experiment + "'");
    }
    if (n < 1) throw ConfigError("config: n must be >= 1");
    if (m < 2) throw ConfigError("config: m must be >= 2");
    if (seeds < 1) throw ConfigError("config: seeds must be >= 1");
    if (samples < 1) throw ConfigError("config: samples must be >= 1");
    if (!(eps > 0.0) || !(eps < 0.5)) throw ConfigError("config: eps must lie in (0, 0.5)");
    if (!(beta > 0.0) || !(beta <= 10.0)) throw ConfigError("config: beta must lie in (0, 10]");
    if (tol < 0.0) throw ConfigError("config: tol must be >= 0");
    if (fit_lo < 0.0 || fit_hi < 0.0) throw ConfigError("config: fit window must be >= 0");
    if (fit_lo > 0.0 && fit_hi > 0.0 && fit_lo > fit_hi) {
        throw ConfigError("config: fit_lo must not exceed fit_hi");
    }
    if (cap < 1) throw ConfigError("config: cap must be >= 1");
    if (out_dir.empty()) throw ConfigError("config: out_dir must not be empty");
    if (out_dir.find('\n') != std::string::npos) {
        throw ConfigError("config: out_dir must be a single line");
    }
}

inline std::string ExperimentConfig::to_string() const {
    std::ostringstream out;
    out << "# bmlab experiment configuration (version " << kVersion << ")\n";
    out << "experiment = " << experiment << "\n";
    out << "n = " << n << "\n";
    out << "m = " << m << "\n";
    out << "seeds = " << seeds << "\n";
    out << "seed_base = " << seed_base << "\n";
    out << "samples = " << samples << "\n";
    out << "eps = " << detail::format_double(eps) << "\n";
    out << "beta = " << detail::format_double(beta) << "\n";
    out << "tol = " << detail::format_double(tol) << "\n";
    out << "fit_lo = " << detail::format_double(fit_lo) << "\n";
    out << "fit_hi = " << detail::format_double(fit_hi) << "\n";
    out << "cap = " << cap << "\n";
    out << "oracle = " << (oracle ? 1 : 0) << "\n";
    out << "out_dir = " << out_dir << "\n";
    return out.str();
}

inline ExperimentConfig ExperimentConfig::parse(const std::string& text) {
    ExperimentConfig c;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const std::string_view full = detail::trim(line);
        if (full.empty() || full.front() == '#') continue;
        const std::size_t eq = full.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("config: expected 'key = value', got: " + std::string(full));
        }
        const std::string_view key = detail::trim(full.substr(0, eq));
        const std::string_view val = detail::trim(full.substr(eq + 1));
        if (key == "experiment") {
            c.experiment = std::string(val);
        } else if (key == "n") {
            c.n = static_cast<std::uint32_t>(detail::parse_u64(key, val));
        } else if (key == "m") {
            c.m = detail::parse_u64(key, val);
        } else if (key == "seeds") {
            c.seeds = static_cast<std::uint32_t>(detail::parse_u64(key, val));
        } else if (key == "seed_base") {
            c.seed_base = detail::parse_u64(key, val);
        } else if (key == "samples") {
            c.samples = static_cast<std::size_t>(detail::parse_u64(key, val));
        } else if (key == "eps") {
            c.eps = detail::parse_f64(key, val);
        } else if (key == "beta") {
            c.beta = detail::parse_f64(key, val);
        } else if (key == "tol") {
            c.tol = detail::parse_f64(key, val);
        } else if (key == "fit_lo") {
            c.fit_lo = detail::parse_f64(key, val);
        } else if (key == "fit_hi") {
            c.fit_hi = detail::parse_f64(key, val);
        } else if (key == "cap") {
            c.cap = static_cast<std::size_t>(detail::parse_u64(key, val));
        } else if (key == "oracle") {
            const std::uint64_t b = detail::parse_u64(key, val);
            if (b > 1) throw ConfigError("config: oracle must be 0 or 1");
            c.oracle = b == 1;
        } else if (key == "out_dir") {
            c.out_dir = std::string(val);
        } else {
            throw ConfigError("config: unknown key '" + std::string(key) + "'");
        }
    }
    c.validate();
    return c;
}

inline void ExperimentConfig::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("config: cannot open for writing: " + path);
    out << to_string();
    if (!out) throw DataError("config: write failed: " + path);
}

inline ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("config: cannot open: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

}  // namespace bmlab
