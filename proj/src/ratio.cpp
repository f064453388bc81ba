#include "ojanet/ratio.hpp"

#include <cctype>
#include <cmath>

namespace ojanet {

namespace {

Ratio combine(__int128 n, __int128 d) {
    if (d < 0) { n = -n; d = -d; }
    __int128 a = n < 0 ? -n : n;
    __int128 b = d;
    while (b != 0) { __int128 t = a % b; a = b; b = t; }
    if (a > 1) { n /= a; d /= a; }
    constexpr __int128 lim = INT64_MAX;
    if (n > lim || n < -lim || d > lim)
        throw std::overflow_error("Ratio: value outside 64-bit range");
    return Ratio(static_cast<std::int64_t>(n), static_cast<std::int64_t>(d));
}

}  // namespace

Ratio Ratio::parse(std::string_view text) {
    if (text.empty()) throw std::invalid_argument("Ratio: empty string");
    auto slash = text.find('/');
    if (slash != std::string_view::npos) {
        std::int64_t n = std::stoll(std::string(text.substr(0, slash)));
        std::int64_t d = std::stoll(std::string(text.substr(slash + 1)));
        return Ratio(n, d);
    }
    bool neg = false;
    std::size_t i = 0;
    if (text[0] == '+' || text[0] == '-') { neg = text[0] == '-'; i = 1; }
    std::int64_t num = 0, den = 1;
    bool after_dot = false, any_digit = false;
    for (; i < text.size(); ++i) {
        char c = text[i];
        if (c == '.') {
            if (after_dot) throw std::invalid_argument("Ratio: bad number: " + std::string(text));
            after_dot = true;
            continue;
        }
        if (!std::isdigit(static_cast<unsigned char>(c)))
            throw std::invalid_argument("Ratio: bad number: " + std::string(text));
        any_digit = true;
        if (num > (INT64_MAX - 9) / 10) throw std::overflow_error("Ratio: too many digits");
        num = num * 10 + (c - '0');
        if (after_dot) {
            if (den > INT64_MAX / 10) throw std::overflow_error("Ratio: too many digits");
            den *= 10;
        }
    }
    if (!any_digit) throw std::invalid_argument("Ratio: bad number: " + std::string(text));
    return Ratio(neg ? -num : num, den);
}

Ratio Ratio::from_double_exact(double x) {
    if (!(x == x) || x == HUGE_VAL || x == -HUGE_VAL)
        throw std::invalid_argument("Ratio::from_double_exact: non-finite value");
    int exp = 0;
    double frac = std::frexp(x, &exp);
    std::int64_t mant = static_cast<std::int64_t>(frac * 9007199254740992.0);  // 2^53
    exp -= 53;
    while (mant != 0 && mant % 2 == 0) {
        mant /= 2;
        ++exp;
    }
    if (exp >= 0) {
        if (exp > 62) throw std::overflow_error("Ratio::from_double_exact: numerator too large");
        return Ratio(mant << exp, 1);
    }
    if (exp < -62) throw std::overflow_error("Ratio::from_double_exact: denominator too large");
    return Ratio(mant, std::int64_t(1) << -exp);
}

Ratio Ratio::operator+(const Ratio& o) const {
    return combine(static_cast<__int128>(num) * o.den + static_cast<__int128>(o.num) * den,
                   static_cast<__int128>(den) * o.den);
}

Ratio Ratio::operator-(const Ratio& o) const {
    return combine(static_cast<__int128>(num) * o.den - static_cast<__int128>(o.num) * den,
                   static_cast<__int128>(den) * o.den);
}

Ratio Ratio::operator*(const Ratio& o) const {
    return combine(static_cast<__int128>(num) * o.num, static_cast<__int128>(den) * o.den);
}

Ratio Ratio::operator/(const Ratio& o) const {
    if (o.num == 0) throw std::invalid_argument("Ratio: division by zero");
    return combine(static_cast<__int128>(num) * o.den, static_cast<__int128>(den) * o.num);
}

}  // namespace ojanet
