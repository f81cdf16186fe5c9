#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "bmlab/errors.hpp"
#include "bmlab/rng.hpp"

namespace bmlab {

// Discretised normalised Brownian excursion on the grid {0, 1/m, ..., 1}.
// values[j] approximates e(j/m); the endpoint values are exactly zero and all
// interior values are nonnegative by construction.
struct Excursion {
    std::uint64_t seed = 0;
    std::vector<double> values;

    std::size_t m() const { return values.empty() ? 0 : values.size() - 1; }
};

// Gaussian random-walk bridge followed by the Vervaat transform: the bridge is
// re-rooted cyclically at its minimum (smallest index on ties), which turns it
// into a nonnegative excursion with the correct conditional law at grid scale.
inline Excursion sample_excursion(std::size_t m, std::uint64_t seed) {
    if (m < 2) throw ConfigError("excursion grid needs m >= 2, got m=" + std::to_string(m));
    Rng rng = Rng::substream(seed, 0x45584355ull);  // excursion stream

    // Random walk with N(0, 1/m) increments, then bridge by subtracting the
    // linear drift to the terminal value.
    std::vector<double> bridge(m + 1, 0.0);
    const double step_sd = 1.0 / std::sqrt(static_cast<double>(m));
    double w = 0.0;
    for (std::size_t k = 1; k <= m; ++k) {
        w += step_sd * rng.normal();
        bridge[k] = w;
    }
    const double drift = bridge[m] / static_cast<double>(m);
    for (std::size_t k = 1; k <= m; ++k) {
        bridge[k] -= drift * static_cast<double>(k);
    }
    bridge[m] = 0.0;

    std::size_t argmin = 0;
    for (std::size_t k = 1; k < m; ++k) {
        if (bridge[k] < bridge[argmin]) argmin = k;
    }

    Excursion ex;
    ex.seed = seed;
    ex.values.resize(m + 1);
    const double low = bridge[argmin];
    for (std::size_t j = 0; j <= m; ++j) {
        const std::size_t idx = (argmin + j) % m;  // index m is identified with 0
        ex.values[j] = bridge[idx] - low;
    }
    ex.values[0] = ex.values[m] = 0.0;
    return ex;
}

// Range-minimum structure with O(1) queries over a fixed array.
class MinTable {
public:
    MinTable() = default;
    explicit MinTable(const std::vector<double>& a) : size_(a.size()) {
        if (size_ == 0) return;
        levels_ = std::max<std::size_t>(1, std::bit_width(size_));
        table_.resize(levels_);
        table_[0] = a;
        for (std::size_t lv = 1; lv < levels_; ++lv) {
            const std::size_t span = std::size_t{1} << lv;
            if (span > size_) {
                table_[lv] = table_[lv - 1];
                continue;
            }
            table_[lv].resize(size_ - span + 1);
            for (std::size_t i = 0; i + span <= size_; ++i) {
                table_[lv][i] = std::min(table_[lv - 1][i], table_[lv - 1][i + span / 2]);
            }
        }
    }

    // Minimum over the inclusive index range [lo, hi].
    double min_in(std::size_t lo, std::size_t hi) const {
        if (lo > hi) std::swap(lo, hi);
        const std::size_t len = hi - lo + 1;
        const std::size_t lv = std::bit_width(len) - 1;
        return std::min(table_[lv][lo], table_[lv][hi + 1 - (std::size_t{1} << lv)]);
    }

private:
    std::size_t size_ = 0;
    std::size_t levels_ = 0;
    std::vector<std::vector<double>> table_;
};

// Tree pseudo-metric of the excursion: d_e(s,t) = e_s + e_t - 2 min_[s,t] e.
// Linear-scan version; use TreeMetric for bulk queries.
inline double tree_distance(const Excursion& e, std::size_t s, std::size_t t) {
    if (s > t) std::swap(s, t);
    double lo = e.values[s];
    for (std::size_t u = s; u <= t; ++u) lo = std::min(lo, e.values[u]);
    return e.values[s] + e.values[t] - 2.0 * lo;
}

// Grid points closer than tol in the tree pseudo-metric are treated as the
// same point of the quotient tree.
inline bool tree_equivalent(const Excursion& e, std::size_t s, std::size_t t, double tol) {
    return tree_distance(e, s, t) <= tol;
}

// Default identification tolerance: a fixed multiple of mesh^(1/2 - 1/8).
// The 1/2 is the Hoelder scale of the excursion; the -1/8 backs the threshold
// off so that genuine identifications at grid resolution are still caught.
inline double default_equiv_tol(std::size_t m) {
    return 2.0 * std::pow(1.0 / static_cast<double>(m), 0.375);
}

// O(1) d_e queries backed by a sparse table.
class TreeMetric {
public:
    explicit TreeMetric(const Excursion& e) : ex_(&e), table_(e.values) {}

    double distance(std::size_t s, std::size_t t) const {
        if (s > t) std::swap(s, t);
        return ex_->values[s] + ex_->values[t] - 2.0 * table_.min_in(s, t);
    }

    bool equivalent(std::size_t s, std::size_t t, double tol) const {
        return distance(s, t) <= tol;
    }

    const Excursion& excursion() const { return *ex_; }

private:
    const Excursion* ex_;
    MinTable table_;
};

// ===== Serialization =====
//
// Flat binary layout, little-endian:
//   "ex1" magic, one version byte, u64 m, u64 seed, f64 values[m+1].

namespace detail {

inline void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_i32(std::string& out, std::int32_t v) {
    put_u32(out, static_cast<std::uint32_t>(v));
}

inline void put_f64(std::string& out, double v) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(v));
    __builtin_memcpy(&bits, &v, sizeof(bits));
    put_u64(out, bits);
}

class ByteReader {
public:
    ByteReader(const std::string& data, std::string what)
        : data_(&data), what_(std::move(what)) {}

    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) {
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>((*data_)[pos_ + i])) << (8 * i);
        }
        pos_ += 8;
        return v;
    }

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>((*data_)[pos_ + i])) << (8 * i);
        }
        pos_ += 4;
        return v;
    }

    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }

    double f64() {
        const std::uint64_t bits = u64();
        double v;
        __builtin_memcpy(&v, &bits, sizeof(v));
        return v;
    }

    unsigned char byte() {
        need(1);
        return static_cast<unsigned char>((*data_)[pos_++]);
    }

    void expect_magic(const char* magic, std::size_t len) {
        need(len);
        for (std::size_t i = 0; i < len; ++i) {
            if ((*data_)[pos_ + i] != magic[i]) throw DataError(what_ + ": bad magic");
        }
        pos_ += len;
    }

    bool exhausted() const { return pos_ == data_->size(); }

    void require_exhausted() {
        if (!exhausted()) throw DataError(what_ + ": trailing bytes");
    }

private:
    void need(std::size_t k) {
        if (pos_ + k > data_->size()) throw DataError(what_ + ": truncated");
    }

    const std::string* data_;
    std::string what_;
    std::size_t pos_ = 0;
};

inline void write_file(const std::string& path, const std::string& bytes) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (f == nullptr) throw DataError("cannot open for writing: " + path);
    const std::size_t written = bytes.empty() ? 0 : std::fwrite(bytes.data(), 1, bytes.size(), f);
    const int rc = std::fclose(f);
    if (written != bytes.size() || rc != 0) throw DataError("short write: " + path);
}

inline std::string read_file(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (f == nullptr) throw DataError("cannot open for reading: " + path);
    std::string bytes;
    char buf[65536];
    std::size_t got = 0;
    while ((got = std::fread(buf, 1, sizeof(buf), f)) > 0) bytes.append(buf, got);
    std::fclose(f);
    return bytes;
}

}  // namespace detail

inline constexpr unsigned char kExcursionFormatVersion = 1;

inline std::string excursion_to_bytes(const Excursion& e) {
    std::string out;
    out += "ex1";
    out.push_back(static_cast<char>(kExcursionFormatVersion));
    detail::put_u64(out, e.m());
    detail::put_u64(out, e.seed);
    for (double v : e.values) detail::put_f64(out, v);
    return out;
}

inline Excursion excursion_from_bytes(const std::string& bytes) {
    detail::ByteReader r(bytes, "excursion");
    r.expect_magic("ex1", 3);
    const unsigned version = r.byte();
    if (version != kExcursionFormatVersion) {
        throw DataError("excursion: unsupported format version " + std::to_string(version));
    }
    Excursion e;
    const std::uint64_t m = r.u64();
    if (m < 2) throw DataError("excursion: m < 2");
    e.seed = r.u64();
    e.values.resize(m + 1);
    for (auto& v : e.values) v = r.f64();
    r.require_exhausted();
    if (e.values.front() != 0.0 || e.values.back() != 0.0) {
        throw DataError("excursion: endpoints must be zero");
    }
    for (double v : e.values) {
        if (!(v >= 0.0)) throw DataError("excursion: negative or non-finite value");
    }
    return e;
}

inline void save_excursion(const Excursion& e, const std::string& path) {
    detail::write_file(path, excursion_to_bytes(e));
}

inline Excursion load_excursion(const std::string& path) {
    return excursion_from_bytes(detail::read_file(path));
}

}  // namespace bmlab
