#pragma once

// Exact quadratic surds p + q*sqrt(r).  Comparisons are decided by sign of
// conjugate products, never by floating point, so critical points compare
// exactly.

#include "rational.hpp"

#include <cmath>
#include <stdexcept>

namespace wavecrit {

struct Quad {
    Rat p;       // rational part
    Rat q;       // coefficient of sqrt(r)
    BigInt r;    // radicand, >= 0

    Quad() : p(0), q(0), r(0) {}
    Quad(const Rat& value) : p(value), q(0), r(0) {}  // NOLINT: implicit by design
    Quad(Rat p_, Rat q_, BigInt r_) : p(std::move(p_)), q(std::move(q_)), r(std::move(r_)) {
        if (r < 0) throw std::invalid_argument("surd: negative radicand");
        if (r == 0 || q == 0) { q = 0; r = 0; return; }
        // pull square factors out of the radicand so equal values share r
        for (BigInt k = 2; k * k <= r; ++k)
            while (r % (k * k) == 0) {
                r /= k * k;
                q *= Rat(k);
            }
        if (r == 1) { p += q; q = 0; r = 0; }
    }

    bool rational() const { return q == 0; }

    double approx() const {
        double v = to_double(p);
        if (q != 0) v += to_double(q) * std::sqrt(r.convert_to<double>());
        return v;
    }
};

namespace detail {
inline BigInt common_radicand(const Quad& a, const Quad& b) {
    if (a.rational()) return b.r;
    if (b.rational()) return a.r;
    if (a.r != b.r) throw std::invalid_argument("surd: mixed radicands");
    return a.r;
}
}  // namespace detail

inline int sign(const Quad& x) {
    if (x.q == 0) return x.p > 0 ? 1 : (x.p < 0 ? -1 : 0);
    if (x.p == 0) return x.q > 0 ? 1 : -1;
    if (x.p > 0 && x.q > 0) return 1;
    if (x.p < 0 && x.q < 0) return -1;
    // opposite signs: compare p^2 against q^2 r
    const Rat lhs = x.p * x.p, rhs = x.q * x.q * Rat(x.r);
    if (lhs == rhs) return 0;
    const bool p_dominates = lhs > rhs;
    return p_dominates == (x.p > 0) ? 1 : -1;
}

inline Quad operator+(const Quad& a, const Quad& b) {
    BigInt r = detail::common_radicand(a, b);
    return Quad{a.p + b.p, a.q + b.q, r};
}
inline Quad operator-(const Quad& a, const Quad& b) {
    BigInt r = detail::common_radicand(a, b);
    return Quad{a.p - b.p, a.q - b.q, r};
}
inline Quad operator-(const Quad& a) { return Quad{-a.p, -a.q, a.r}; }
inline Quad operator*(const Quad& a, const Quad& b) {
    BigInt r = detail::common_radicand(a, b);
    return Quad{a.p * b.p + a.q * b.q * Rat(r), a.p * b.q + a.q * b.p, r};
}
inline Quad operator/(const Quad& a, const Quad& b) {
    if (sign(b) == 0) throw std::invalid_argument("surd: division by zero");
    if (b.rational()) return Quad{a.p / b.p, a.q / b.p, a.r};
    // multiply by the conjugate of b
    const Quad conj{b.p, -b.q, b.r};
    const Rat norm = b.p * b.p - b.q * b.q * Rat(b.r);
    Quad num = a * conj;
    return Quad{num.p / norm, num.q / norm, num.r};
}

inline bool operator==(const Quad& a, const Quad& b) { return sign(a - b) == 0; }
inline bool operator!=(const Quad& a, const Quad& b) { return sign(a - b) != 0; }
inline bool operator<(const Quad& a, const Quad& b) { return sign(a - b) < 0; }
inline bool operator>(const Quad& a, const Quad& b) { return sign(a - b) > 0; }
inline bool operator<=(const Quad& a, const Quad& b) { return sign(a - b) <= 0; }
inline bool operator>=(const Quad& a, const Quad& b) { return sign(a - b) >= 0; }

}  // namespace wavecrit
