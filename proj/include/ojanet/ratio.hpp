#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ojanet {

/// Exact rational with 64-bit numerator/denominator.
///
/// Threshold tests of the form |S| >= r*k and the derived counts
/// floor(r*k), ceil(r*k) must not depend on float rounding, so ratios
/// coming from configuration are kept exact and compared by
/// cross-multiplication. Intermediate products go through 128-bit
/// integers.
struct Ratio {
    std::int64_t num = 0;
    std::int64_t den = 1;

    constexpr Ratio() = default;
    Ratio(std::int64_t n, std::int64_t d) : num(n), den(d) { normalize(); }

    /// Accepts "0.51", ".5", "1", "29/131".
    static Ratio parse(std::string_view text);

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }

    /// count >= r*k, exact.
    bool count_at_least(std::int64_t count, std::int64_t k) const {
        return static_cast<__int128>(count) * den >= static_cast<__int128>(num) * k;
    }
    std::int64_t floor_mul(std::int64_t k) const {
        __int128 p = static_cast<__int128>(num) * k;
        __int128 q = p / den;
        if (p < 0 && p % den != 0) --q;
        return static_cast<std::int64_t>(q);
    }
    std::int64_t ceil_mul(std::int64_t k) const {
        __int128 p = static_cast<__int128>(num) * k;
        __int128 q = p / den;
        if (p > 0 && p % den != 0) ++q;
        return static_cast<std::int64_t>(q);
    }
    bool integer_mul(std::int64_t k) const {
        return (static_cast<__int128>(num) * k) % den == 0;
    }

    Ratio operator+(const Ratio& o) const;
    Ratio operator-(const Ratio& o) const;
    Ratio operator*(const Ratio& o) const;
    Ratio operator/(const Ratio& o) const;

    bool operator==(const Ratio& o) const { return num == o.num && den == o.den; }
    bool operator<(const Ratio& o) const {
        return static_cast<__int128>(num) * o.den < static_cast<__int128>(o.num) * den;
    }
    bool operator<=(const Ratio& o) const { return *this < o || *this == o; }

    std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }

    /// The exact rational value of a finite double (every finite double is
    /// one). Throws when numerator or denominator exceeds 64 bits.
    static Ratio from_double_exact(double x);

private:
    void normalize() {
        if (den == 0) throw std::invalid_argument("Ratio: zero denominator");
        if (den < 0) { num = -num; den = -den; }
        std::int64_t g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) { num /= g; den /= g; }
    }
};

}  // namespace ojanet
