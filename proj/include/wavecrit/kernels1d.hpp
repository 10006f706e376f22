#pragma once

// Exact solution operator for the inhomogeneous 1+1 wave equation with zero
// data and axis reflection (the spherically symmetric psi = r phi reduction):
//
//   psi(u, v)      = int_{u0}^{u} du' int_{u}^{v} dv' F(u', v')
//   dv psi(u, v)   = int_{u0}^{u} du' F(u', v)
//   du psi(u, v)   = -int_{u0}^{u} du' F(u', u) + int_{u}^{v} dv' F(u, v')
//
// Parametric power-law forcings c v^-sigma u^-z on {u > u0} integrate in
// closed form; general closures go through adaptive Simpson panels with
// Richardson control.  This is the high-accuracy oracle the characteristic
// simulator is measured against.

#include "rational.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace wavecrit {

struct ForcingSpec {
    std::function<double(double, double)> fn;  // used when not parametric
    double c = 1.0, sigma = 0.0, z = 0.0;
    double u0 = 1.0;  // support {u > u0}
    bool parametric = true;

    static ForcingSpec power(double c, double sigma, double z, double u0 = 1.0) {
        ForcingSpec f;
        f.c = c;
        f.sigma = sigma;
        f.z = z;
        f.u0 = u0;
        return f;
    }
    static ForcingSpec closure(std::function<double(double, double)> fn, double u0) {
        ForcingSpec f;
        f.fn = std::move(fn);
        f.u0 = u0;
        f.parametric = false;
        return f;
    }

    // right-continuous at the support edge so panel endpoints see the limit
    double operator()(double u, double v) const {
        if (u < u0) return 0.0;
        if (parametric) return c * std::pow(v, -sigma) * std::pow(u, -z);
        return fn(u, v);
    }
};

namespace detail {

// int_a^b x^-p dx, a > 0
inline double power_panel(double a, double b, double p) {
    if (b <= a) return 0.0;
    if (p == 1.0) return std::log(b / a);
    return (std::pow(b, 1.0 - p) - std::pow(a, 1.0 - p)) / (1.0 - p);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double fa, double fm, double fb, double whole, double tol,
                               int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;  // Richardson correction
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

// rtol is relative to a coarse first estimate of the integral
inline double integrate_1d(const std::function<double(double)>& f, double a, double b,
                           double rtol) {
    if (b <= a) return 0.0;
    double coarse = 0.0;
    for (int k = 0; k < 8; ++k) {
        const double xa = a + (b - a) * k / 8.0, xb = a + (b - a) * (k + 1) / 8.0;
        coarse += (xb - xa) / 6.0 * (f(xa) + 4.0 * f(0.5 * (xa + xb)) + f(xb));
    }
    const double tol = rtol * std::max(std::abs(coarse), 1e-300);
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace detail

struct KernelResult {
    double value = 0.0;
    bool diverged = false;
};

inline KernelResult kernel_value_checked(const ForcingSpec& F, double u, double v,
                                         double rtol = 1e-8) {
    if (u > v) throw std::invalid_argument("kernel_value: u <= v required");
    KernelResult out;
    const double lo = F.u0;
    if (u <= lo) return out;  // forcing has not switched on yet
    if (F.parametric) {
        if (lo <= 0.0 && F.z >= 1.0) {
            out.diverged = true;
            return out;
        }
        out.value = F.c * detail::power_panel(lo, u, F.z) * detail::power_panel(u, v, F.sigma);
        if (!std::isfinite(out.value)) out.diverged = true;
        return out;
    }
    auto inner = [&](double up) {
        return detail::integrate_1d([&](double vp) { return F(up, vp); }, u, v, rtol * 1e-2);
    };
    out.value = detail::integrate_1d(inner, lo, u, rtol);
    if (!std::isfinite(out.value)) out.diverged = true;
    return out;
}

inline double kernel_value(const ForcingSpec& F, double u, double v, double rtol = 1e-8) {
    auto r = kernel_value_checked(F, u, v, rtol);
    if (r.diverged) throw std::domain_error("kernel_value: non-integrable forcing");
    return r.value;
}

inline double kernel_dv(const ForcingSpec& F, double u, double v, double rtol = 1e-8) {
    if (u > v) throw std::invalid_argument("kernel_dv: u <= v required");
    if (u <= F.u0) return 0.0;
    if (F.parametric) return F.c * std::pow(v, -F.sigma) * detail::power_panel(F.u0, u, F.z);
    return detail::integrate_1d([&](double up) { return F(up, v); }, F.u0, u, rtol);
}

inline double kernel_du(const ForcingSpec& F, double u, double v, double rtol = 1e-8) {
    if (u > v) throw std::invalid_argument("kernel_du: u <= v required");
    double incoming = 0.0, outgoing = 0.0;
    if (u > F.u0) {
        if (F.parametric)
            incoming = F.c * std::pow(u, -F.sigma) * detail::power_panel(F.u0, u, F.z);
        else
            incoming = detail::integrate_1d([&](double up) { return F(up, u); }, F.u0, u, rtol);
        if (F.parametric)
            outgoing = F.c * std::pow(u, -F.z) * detail::power_panel(u, v, F.sigma);
        else
            outgoing = detail::integrate_1d([&](double vp) { return F(u, vp); }, u, v, rtol);
    }
    return -incoming + outgoing;
}

// --- closed-form rate statements ----------------------------------------------

struct TailLowerBound {
    Rat t_rate;  // psi >= c t^{-t_rate} u^{-u_rate} at late retarded times
    Rat u_rate;
    bool log_flag = false;  // borderline exponent produces a logarithm instead
};

inline TailLowerBound lower_bound_tail(const Rat& c, const Rat& q, const Rat& s,
                                       const Rat& u0) {
    if (c <= 0) throw std::invalid_argument("lower_bound_tail: c > 0 required");
    if (u0 <= 0) throw std::invalid_argument("lower_bound_tail: u0 > 0 required");
    TailLowerBound out;
    out.t_rate = 1;
    out.u_rate = q - 1 - rat_max(Rat(1) - s, Rat(0));
    out.log_flag = q == 1 || s == 1;
    return out;
}

struct JohnBound {
    Rat alpha_sup;  // the v-weight is anything below this
    Rat beta;
    bool log_flag = false;  // delta exactly 1 is the borderline u-weight
};

inline JohnBound john_bound(const Rat& gamma, const Rat& delta, int n) {
    if (n < 2) throw std::invalid_argument("john_bound: n >= 2 required");
    JohnBound out;
    out.alpha_sup = Rat(n - 1, 2);
    out.beta = gamma - Rat(n + 3, 2) + rat_min(Rat(1), delta);
    out.log_flag = delta == 1;
    return out;
}

}  // namespace wavecrit
