#pragma once

// Exact rational scalar used by every classifier-side computation.
// Floats never decide solvability; they only appear in reports.

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <stdexcept>
#include <string>

namespace wavecrit {

using Rat = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline double to_double(const Rat& x) { return x.convert_to<double>(); }

inline Rat rat_abs(const Rat& x) { return x < 0 ? Rat(-x) : x; }

inline Rat rat_min(const Rat& a, const Rat& b) { return a < b ? a : b; }
inline Rat rat_max(const Rat& a, const Rat& b) { return a < b ? b : a; }

// x^k for integer k >= 0.
inline Rat rat_pow(Rat x, unsigned k) {
    Rat r(1);
    while (k) {
        if (k & 1u) r *= x;
        x *= x;
        k >>= 1;
    }
    return r;
}

// Parses "p", "p/q" or a decimal string like "-1.85" into an exact rational.
inline std::optional<Rat> parse_rational(const std::string& s) {
    if (s.empty()) return std::nullopt;
    auto digits_only = [](const std::string& t) {
        if (t.empty()) return false;
        for (char c : t)
            if (c < '0' || c > '9') return false;
        return true;
    };
    std::string body = s;
    bool neg = false;
    if (body[0] == '+' || body[0] == '-') {
        neg = body[0] == '-';
        body = body.substr(1);
    }
    auto slash = body.find('/');
    if (slash != std::string::npos) {
        std::string num = body.substr(0, slash), den = body.substr(slash + 1);
        if (!digits_only(num) || !digits_only(den)) return std::nullopt;
        BigInt n(num), d(den);
        if (d == 0) return std::nullopt;
        Rat r(n, d);
        return neg ? Rat(-r) : r;
    }
    auto dot = body.find('.');
    if (dot == std::string::npos) {
        if (!digits_only(body)) return std::nullopt;
        Rat r{BigInt(body)};
        return neg ? Rat(-r) : r;
    }
    std::string ip = body.substr(0, dot), fp = body.substr(dot + 1);
    if (ip.empty()) ip = "0";
    if (!digits_only(ip) || (!fp.empty() && !digits_only(fp))) return std::nullopt;
    Rat r{BigInt(ip)};
    if (!fp.empty()) {
        BigInt num(fp);
        BigInt den(1);
        for (size_t i = 0; i < fp.size(); ++i) den *= 10;
        r += Rat(num, den);
    }
    return neg ? Rat(-r) : r;
}

inline Rat parse_rational_or_throw(const std::string& s) {
    auto r = parse_rational(s);
    if (!r) throw std::invalid_argument("not a rational: '" + s + "'");
    return *r;
}

inline std::string to_string(const Rat& x) {
    std::string s = numerator(x).str();
    if (denominator(x) != 1) s += "/" + denominator(x).str();
    return s;
}

}  // namespace wavecrit
