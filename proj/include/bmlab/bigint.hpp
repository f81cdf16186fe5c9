#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bmlab {

// Unsigned integer of unbounded width. Geodesic counts on a breadth-first
// DAG only ever need addition and comparison, so the type provides exactly
// that plus decimal formatting. Limbs are base 2^64, little-endian, with no
// trailing zero limbs (the value 0 has no limbs).
class BigUint {
public:
    BigUint() = default;
    explicit BigUint(std::uint64_t v) {
        if (v != 0) limbs_.push_back(v);
    }

    bool is_zero() const { return limbs_.empty(); }

    bool fits_u64() const { return limbs_.size() <= 1; }
    std::uint64_t as_u64() const { return limbs_.empty() ? 0 : limbs_[0]; }

    // Saturating view: UINT64_MAX when the value does not fit.
    std::uint64_t saturated_u64() const {
        return limbs_.size() > 1 ? UINT64_MAX : as_u64();
    }

    BigUint& operator+=(const BigUint& o) {
        const std::size_t ns = o.limbs_.size();
        if (limbs_.size() < ns) limbs_.resize(ns, 0);
        std::uint64_t carry = 0;
        std::size_t i = 0;
        for (; i < ns; ++i) {
            std::uint64_t s = limbs_[i] + carry;
            carry = (s < carry) ? 1 : 0;
            s += o.limbs_[i];
            if (s < o.limbs_[i]) carry = 1;
            limbs_[i] = s;
        }
        for (; carry != 0 && i < limbs_.size(); ++i) {
            limbs_[i] += 1;
            carry = (limbs_[i] == 0) ? 1 : 0;
        }
        if (carry != 0) limbs_.push_back(1);
        return *this;
    }

    friend BigUint operator+(BigUint a, const BigUint& b) {
        a += b;
        return a;
    }

    friend bool operator==(const BigUint& a, const BigUint& b) {
        return a.limbs_ == b.limbs_;
    }
    friend bool operator!=(const BigUint& a, const BigUint& b) { return !(a == b); }

    friend bool operator<(const BigUint& a, const BigUint& b) {
        if (a.limbs_.size() != b.limbs_.size()) return a.limbs_.size() < b.limbs_.size();
        for (std::size_t i = a.limbs_.size(); i-- > 0;) {
            if (a.limbs_[i] != b.limbs_[i]) return a.limbs_[i] < b.limbs_[i];
        }
        return false;
    }
    friend bool operator<=(const BigUint& a, const BigUint& b) { return !(b < a); }
    friend bool operator>(const BigUint& a, const BigUint& b) { return b < a; }
    friend bool operator>=(const BigUint& a, const BigUint& b) { return !(a < b); }

    bool operator==(std::uint64_t v) const { return *this == BigUint(v); }
    bool operator>=(std::uint64_t v) const { return *this >= BigUint(v); }

    std::string to_string() const {
        if (limbs_.empty()) return "0";
        // Repeated division by 10^19 (the largest power of ten in a limb).
        static constexpr std::uint64_t kChunk = 10000000000000000000ull;
        std::vector<std::uint64_t> work(limbs_);
        std::string out;
        while (!work.empty()) {
            unsigned __int128 rem = 0;
            for (std::size_t i = work.size(); i-- > 0;) {
                unsigned __int128 cur = (rem << 64) | work[i];
                work[i] = static_cast<std::uint64_t>(cur / kChunk);
                rem = cur % kChunk;
            }
            while (!work.empty() && work.back() == 0) work.pop_back();
            std::string part = std::to_string(static_cast<std::uint64_t>(rem));
            if (!work.empty()) {
                part.insert(part.begin(), 19 - part.size(), '0');
            }
            out.insert(0, part);
        }
        return out;
    }

private:
    std::vector<std::uint64_t> limbs_;
};

}  // namespace bmlab
