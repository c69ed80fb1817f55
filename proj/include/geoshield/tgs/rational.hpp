#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>

namespace geoshield::tgs {

// Exact rational on int64 (values here are small: scores, rates, window
// lengths). Overflow is checked; protocol parameters never get close.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    static Rational of(std::int64_t n, std::int64_t d = 1) {
        if (d == 0) throw std::invalid_argument("Rational: zero denominator");
        if (d < 0) { n = -n; d = -d; }
        std::int64_t g = std::gcd(n < 0 ? -n : n, d);
        if (g > 1) { n /= g; d /= g; }
        return Rational{n, d};
    }

    // Parses "0.2", "1", "3/7", ".999". Exact: "0.2" becomes 1/5.
    static Rational parse(std::string_view s);

    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }

    friend Rational operator+(Rational a, Rational b) {
        return of(checked_add(checked_mul(a.num, b.den), checked_mul(b.num, a.den)),
                  checked_mul(a.den, b.den));
    }
    friend Rational operator-(Rational a, Rational b) {
        return a + Rational{-b.num, b.den};
    }
    friend Rational operator*(Rational a, Rational b) {
        return of(checked_mul(a.num, b.num), checked_mul(a.den, b.den));
    }
    friend Rational operator/(Rational a, Rational b) {
        if (b.num == 0) throw std::invalid_argument("Rational: division by zero");
        return of(checked_mul(a.num, b.den), checked_mul(a.den, b.num));
    }
    friend bool operator==(Rational a, Rational b) {
        a = of(a.num, a.den);
        b = of(b.num, b.den);
        return a.num == b.num && a.den == b.den;
    }
    friend bool operator<(Rational a, Rational b) {
        return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
    }
    friend bool operator<=(Rational a, Rational b) { return a < b || a == b; }
    friend bool operator>(Rational a, Rational b) { return b < a; }
    friend bool operator>=(Rational a, Rational b) { return b <= a; }

    std::int64_t floor() const {
        std::int64_t q = num / den;
        if (num % den != 0 && num < 0) --q;
        return q;
    }
    std::int64_t ceil() const {
        std::int64_t q = num / den;
        if (num % den != 0 && num > 0) ++q;
        return q;
    }

  private:
    static std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
        __int128 r = static_cast<__int128>(a) * b;
        if (r > INT64_MAX || r < INT64_MIN) throw std::overflow_error("Rational overflow");
        return static_cast<std::int64_t>(r);
    }
    static std::int64_t checked_add(std::int64_t a, std::int64_t b) {
        __int128 r = static_cast<__int128>(a) + b;
        if (r > INT64_MAX || r < INT64_MIN) throw std::overflow_error("Rational overflow");
        return static_cast<std::int64_t>(r);
    }
};

inline Rational Rational::parse(std::string_view s) {
    auto bad = [&] { throw std::invalid_argument("Rational: cannot parse '" + std::string(s) + "'"); };
    if (s.empty()) bad();
    bool neg = false;
    std::size_t i = 0;
    if (s[0] == '-' || s[0] == '+') { neg = s[0] == '-'; i = 1; }
    std::int64_t num = 0, den = 1;
    bool digits = false, frac = false, slash = false;
    std::int64_t slash_den = 0;
    for (; i < s.size(); ++i) {
        char c = s[i];
        if (c == '.') {
            if (frac || slash) bad();
            frac = true;
        } else if (c == '/') {
            if (slash || frac || !digits) bad();
            slash = true;
            digits = false;
        } else if (c >= '0' && c <= '9') {
            digits = true;
            if (slash) {
                slash_den = slash_den * 10 + (c - '0');
            } else {
                num = num * 10 + (c - '0');
                if (frac) den *= 10;
            }
            if (num < 0 || den < 0 || slash_den < 0) bad();
        } else {
            bad();
        }
    }
    if (!digits) bad();
    if (slash) {
        if (slash_den == 0) bad();
        den = slash_den;
    }
    return of(neg ? -num : num, den);
}

}  // namespace geoshield::tgs
