#pragma once

// Closed-form critical exponents and critical curves, used as independent
// ground truth against the fixed-point classifier.

#include "surd.hpp"

#include <stdexcept>

namespace wavecrit::catalog {

enum class Side { StableSide, Critical, UnstableSide };
enum class CurvePosition { Above, On, Below };

// positive root of (n-1) q^2 - (n+1) q - 2 = 0
inline Quad strauss_exponent(int n) {
    if (n < 2) throw std::invalid_argument("strauss_exponent: n >= 2 required");
    const Rat a(n - 1), b(-(n + 1)), c(-2);
    const BigInt disc = BigInt(n + 1) * (n + 1) + 8 * BigInt(n - 1);
    return Quad{-b / (2 * a), Rat(1) / (2 * a), disc};
}

inline Rat glassey_exponent(int n) {
    if (n < 2) throw std::invalid_argument("glassey_exponent: n >= 2 required");
    return Rat(1) + Rat(2, n - 1);
}

// positive root of q (q - 1) (n + 1) / 2 = 1, except that the inherent
// u^{-(n-1)/2} tail of even dimensions overrides the n = 2 value to 3/2
inline Quad dv_exponent(int n) {
    if (n < 2) throw std::invalid_argument("dv_exponent: n >= 2 required");
    if (n == 2) return Quad{Rat(3, 2)};
    const Rat a(n + 1);
    const BigInt disc = BigInt(n + 1) * (n + 1) + 8 * BigInt(n + 1);
    return Quad{Rat(1, 2), Rat(1) / (2 * a), disc};
}

namespace detail {
inline void require_power(const Quad& q) {
    if (sign(q - Quad{Rat(1)}) <= 0) throw std::invalid_argument("catalog: power must exceed 1");
}
inline Side side_of_sign(int s) {
    if (s > 0) return Side::StableSide;
    if (s == 0) return Side::Critical;
    return Side::UnstableSide;
}
// stable iff every entry > 0; critical iff none < 0 and some == 0
inline Side side_of_all(std::initializer_list<int> signs) {
    bool zero = false;
    for (int s : signs) {
        if (s < 0) return Side::UnstableSide;
        if (s == 0) zero = true;
    }
    return zero ? Side::Critical : Side::StableSide;
}
}  // namespace detail

// max((q1+2+1/q2)/(q1 q2 - 1), (q2+2+1/q1)/(q1 q2 - 1)) vs (n-1)/2
inline CurvePosition two_strauss_on_curve(const Quad& q1, const Quad& q2, int n) {
    detail::require_power(q1);
    detail::require_power(q2);
    const Quad denom = q1 * q2 - Quad{Rat(1)};
    const Quad lhs1 = (q1 + Quad{Rat(2)} + Quad{Rat(1)} / q2) / denom;
    const Quad lhs2 = (q2 + Quad{Rat(2)} + Quad{Rat(1)} / q1) / denom;
    const Quad v = lhs1 > lhs2 ? lhs1 : lhs2;
    const int s = sign(v - Quad{Rat(n - 1, 2)});
    if (s < 0) return CurvePosition::Above;   // stable side
    if (s == 0) return CurvePosition::On;
    return CurvePosition::Below;
}

inline Side two_strauss_side(const Quad& q1, const Quad& q2, int n) {
    switch (two_strauss_on_curve(q1, q2, n)) {
        case CurvePosition::Above: return Side::StableSide;
        case CurvePosition::On: return Side::Critical;
        default: return Side::UnstableSide;
    }
}

// single field with |d_t phi|^{q1} + |phi|^{q2}:
// stable iff q1 > q_Glassey, q2 > q_Strauss and (q2-1)((n-1) q1 - 2) > 4
inline Side strauss_glassey_scalar_curve(const Quad& q1, const Quad& q2, int n) {
    detail::require_power(q1);
    detail::require_power(q2);
    const int s1 = sign(q1 - Quad{glassey_exponent(n)});
    const int s2 = sign(q2 - strauss_exponent(n));
    const Quad curve = (q2 - Quad{Rat(1)}) * (Quad{Rat(n - 1)} * q1 - Quad{Rat(2)}) - Quad{Rat(4)};
    return detail::side_of_all({s1, s2, sign(curve)});
}

// coupled pair with |psi|^{q1} into phi and |d_t phi|^{q2} into psi;
// a = (n-1)/2 (q1-1) - 1, b = (n-1)/2 (q2-1) - 1.
// For a >= 0 the known curve is q2(a+1) - 1 - q2 + q1 q2 b > 0; for a < 0
// the region continues along q1 q2 (b + q2 a) > 1.
inline Side strauss_glassey_system_curve(const Quad& q1, const Quad& q2, int n) {
    detail::require_power(q1);
    detail::require_power(q2);
    const Quad A{Rat(n - 1, 2)};
    const Quad a = A * (q1 - Quad{Rat(1)}) - Quad{Rat(1)};
    const Quad b = A * (q2 - Quad{Rat(1)}) - Quad{Rat(1)};
    if (sign(a) >= 0) {
        const Quad t = q2 * (a + Quad{Rat(1)}) - Quad{Rat(1)} - q2 + q1 * q2 * b;
        return detail::side_of_sign(sign(t));
    }
    const Quad t = q1 * q2 * (b + q2 * a) - Quad{Rat(1)};
    return detail::side_of_sign(sign(t));
}

// |psi|^{q1} into phi; |d_t phi|^{(n+1)/(n-1)} + |phi|^{q2} into psi.
// b >= 0 branch: (n+1)/(n-1) a > 1 and (n-1)/2 (q1 q2 - 1) - 2 q2 - 2 > 0
// (the latter reads q1 q2 > 2 q2 + 3 when n = 3);
// b < 0 branch: q2 (a - 1 + q1 b) > 1.
inline Side strauss_null_curve(const Quad& q1, const Quad& q2, int n) {
    detail::require_power(q1);
    detail::require_power(q2);
    const Quad A{Rat(n - 1, 2)};
    const Quad a = A * (q1 - Quad{Rat(1)}) - Quad{Rat(1)};
    const Quad b = A * (q2 - Quad{Rat(1)}) - Quad{Rat(1)};
    if (sign(b) >= 0) {
        const Quad c1 = Quad{Rat(n + 1, n - 1)} * a - Quad{Rat(1)};
        const Quad c2 = A * (q1 * q2 - Quad{Rat(1)}) - Quad{Rat(2)} * q2 - Quad{Rat(2)};
        return detail::side_of_all({sign(c1), sign(c2)});
    }
    const Quad t = q2 * (a - Quad{Rat(1)} + q1 * b) - Quad{Rat(1)};
    return detail::side_of_sign(sign(t));
}

// t^alpha u^beta (d_t phi)^q nonlinearity:
// stable iff (n-1)/2 (q-1) - 1 - alpha > 0 and q((n-1)/2 (q-1) - 1 - alpha) + q - 1 - beta > 0
inline Side kitamura_condition(const Quad& q, const Rat& alpha, const Rat& beta, int n) {
    detail::require_power(q);
    const Quad A{Rat(n - 1, 2)};
    const Quad c1 = A * (q - Quad{Rat(1)}) - Quad{Rat(1)} - Quad{alpha};
    const Quad c2 = q * c1 + q - Quad{Rat(1)} - Quad{beta};
    return detail::side_of_all({sign(c1), sign(c2)});
}

// |phi|^{q1} with initial data of r^{-q_data} fall-off, three space dimensions:
// for q_data >= q1 - 1 the compact-data verdict (Strauss on q1) applies,
// below that the tail dominates and the condition is q_data (q1 - 1) > 2.
inline Side initial_tail_condition(const Quad& q1, const Rat& q_data, int n) {
    detail::require_power(q1);
    if (n != 3) throw std::invalid_argument("initial_tail_condition: derived for n = 3 only");
    if (q_data <= 0) throw std::invalid_argument("initial_tail_condition: q_data > 0 required");
    const int s_sigma = sign(q1 - Quad{Rat(2)});
    const Quad qd{q_data};
    int s_tail;
    if (sign(qd - (q1 - Quad{Rat(1)})) >= 0)
        s_tail = sign(q1 - strauss_exponent(3));
    else
        s_tail = sign(qd * (q1 - Quad{Rat(1)}) - Quad{Rat(2)});
    return detail::side_of_all({s_sigma, s_tail});
}

}  // namespace wavecrit::catalog
