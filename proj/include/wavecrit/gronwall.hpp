#pragma once

// Comparison integrator for the cyclic ODE system
//
//     dx_i/dt = c_i t^{-alpha_i} x_{i-1}^{p_i},   x_0 := x_n,
//
// integrated in s = log t with adaptive RK4.  Finite-time blow-up is declared
// once the product state is large enough that the scalar comparison
// ds y = C y^{1 + m} leaves less remaining s-time than the current step.

#include "fitting.hpp"
#include "rational.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace wavecrit {

struct GronwallSystem {
    int n = 1;
    std::vector<double> c;      // > 0
    std::vector<double> alpha;
    std::vector<double> p;      // >= 1
    std::vector<double> x0;     // data at t0, > 0 for the lemma to bite
    double t0 = 1.0;

    void validate() const {
        if (n <= 0 || static_cast<size_t>(n) != c.size() || c.size() != alpha.size() ||
            c.size() != p.size() || c.size() != x0.size())
            throw std::invalid_argument("gronwall: inconsistent sizes");
        for (double v : c)
            if (v <= 0) throw std::invalid_argument("gronwall: c_i > 0 required");
        for (double v : p)
            if (v < 1) throw std::invalid_argument("gronwall: p_i >= 1 required");
        if (t0 < 1) throw std::invalid_argument("gronwall: t0 >= 1 required");
    }
};

inline bool check_hypotheses(const GronwallSystem& sys) {
    sys.validate();
    double prod = 1, sum = 0;
    for (int i = 0; i < sys.n; ++i) {
        prod *= sys.p[i];
        sum += sys.alpha[i];
    }
    bool positive = true;
    for (double v : sys.x0) positive = positive && v > 0;
    return prod > 1.0 && sum <= sys.n && positive;
}

struct GronwallResult {
    std::optional<double> blowup_time;
    bool refined_ok = false;    // rtol and rtol/10 estimates agree within 5%
    bool overflowed = false;    // state left double range without a certificate
    Series trajectory;          // (t, max_i x_i), thinned
};

namespace detail {

struct GronwallRun {
    std::optional<double> blowup_time;
    bool overflowed = false;
    Series trajectory;
};

inline GronwallRun integrate_once(const GronwallSystem& sys, double t_max, double rtol) {
    const int n = sys.n;
    std::vector<double> x = sys.x0;
    double s = std::log(sys.t0);
    const double s_max = std::log(t_max);

    double prod_p = 1, prod_c = 1;
    for (int i = 0; i < n; ++i) { prod_p *= sys.p[i]; prod_c *= sys.c[i]; }
    const double p1 = *std::max_element(sys.p.begin(), sys.p.end());
    double Q = 0;
    for (int i = 1; i <= n; ++i) Q += std::pow(p1, double(i) / n);
    const double m = prod_p > 1 ? (std::pow(p1, 1.0 / n) - 1.0) / Q : 0.0;
    double beta = 0;
    for (int i = 0; i < n; ++i) beta += 1.0 - sys.alpha[i];

    auto rhs = [&](double sv, const std::vector<double>& y, std::vector<double>& dy) {
        for (int i = 0; i < n; ++i) {
            const double prev = y[(i + n - 1) % n];
            dy[i] = sys.c[i] * std::exp(sv * (1.0 - sys.alpha[i])) *
                    std::pow(std::max(prev, 0.0), sys.p[i]);
        }
    };
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n), full(n), half(n);
    auto rk4 = [&](double sv, const std::vector<double>& y, double hstep,
                   std::vector<double>& out) {
        rhs(sv, y, k1);
        for (int i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * hstep * k1[i];
        rhs(sv + 0.5 * hstep, tmp, k2);
        for (int i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * hstep * k2[i];
        rhs(sv + 0.5 * hstep, tmp, k3);
        for (int i = 0; i < n; ++i) tmp[i] = y[i] + hstep * k3[i];
        rhs(sv + hstep, tmp, k4);
        for (int i = 0; i < n; ++i)
            out[i] = y[i] + hstep / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    };

    GronwallRun run;
    double h = 1e-3;
    double next_record = s;
    const double record_step = std::max((s_max - s) / 2000.0, 1e-6);
    int steps = 0;
    while (s < s_max && steps < 50'000'000) {
        ++steps;
        if (s >= next_record) {
            run.trajectory.emplace_back(std::exp(s), *std::max_element(x.begin(), x.end()));
            next_record = s + record_step;
        }
        h = std::min(h, s_max - s);
        rk4(s, x, h, full);
        rk4(s, x, 0.5 * h, tmp);
        half = tmp;
        rk4(s + 0.5 * h, half, 0.5 * h, tmp);
        half = tmp;
        double rel = 0;
        bool finite = true;
        for (int i = 0; i < n; ++i) {
            if (!std::isfinite(half[i]) || !std::isfinite(full[i])) { finite = false; break; }
            rel = std::max(rel, std::abs(full[i] - half[i]) / (15.0 * (std::abs(half[i]) + 1e-30)));
        }
        if (!finite) {
            if (h > 1e-14) { h *= 0.5; continue; }
            // state leaves double range; with product condition met this is
            // the blow-up asymptote itself
            if (prod_p > 1)
                run.blowup_time = std::exp(s);
            else
                run.overflowed = true;
            return run;
        }
        if (rel > rtol && h > 1e-14) { h *= 0.5; continue; }
        s += h;
        x = half;
        if (rel < rtol / 64.0) h = std::min(h * 2.0, 0.05);

        if (prod_p > 1) {
            double xprod = 1, xmax = 0, xmin = std::numeric_limits<double>::infinity();
            for (double v : x) { xprod *= v; xmax = std::max(xmax, v); xmin = std::min(xmin, v); }
            if (xmax > 1e12 && xmin > 1.0 && m > 0 && beta >= 0) {
                const double factor = prod_c * std::exp(s * beta);
                const double remaining = std::pow(xprod, -m) / (factor * m);
                if (remaining < h) {
                    run.blowup_time = std::exp(s + remaining);
                    run.trajectory.emplace_back(std::exp(s), xmax);
                    return run;
                }
            }
        }
    }
    run.trajectory.emplace_back(std::exp(std::min(s, s_max)),
                                *std::max_element(x.begin(), x.end()));
    return run;
}

}  // namespace detail

inline GronwallResult integrate(const GronwallSystem& sys, double t_max = 1e10,
                                double rtol = 1e-6) {
    sys.validate();
    for (double v : sys.x0)
        if (v <= 0) throw std::invalid_argument("gronwall integrate: positive data required");
    auto coarse = detail::integrate_once(sys, t_max, rtol);
    GronwallResult out;
    out.overflowed = coarse.overflowed;
    out.trajectory = std::move(coarse.trajectory);
    if (!coarse.blowup_time) return out;
    auto fine = detail::integrate_once(sys, t_max, rtol / 10.0);
    if (fine.blowup_time) {
        out.blowup_time = fine.blowup_time;
        out.refined_ok =
            std::abs(*coarse.blowup_time - *fine.blowup_time) <= 0.05 * *fine.blowup_time;
    }
    return out;
}

// --- coupling from simulated moments -------------------------------------------
//
// For the cyclic power system box phi_i = |phi_{i-1}|^{q_i} the moment
// H_i = int phi_i dx obeys H_i'' = M_i >= c_i (1+t)^{-alpha} H_{i-1}^{1+eps},
// with (c_i, alpha_i) fitted from the recorded moment and source-moment
// series.  The second-order equations interleave into a first-order cyclic
// system by inserting H_i' links (p = 1, alpha = 0); reversing the component
// order maps successor coupling onto the lemma's x_{i-1} convention.

struct MomentCoupling {
    bool applicable = false;
    std::string reason;
    GronwallSystem sys;
};

// source_of_field[i] = j says equation i is forced by |phi_j|^{q_i}; the map
// must form a single cycle through all fields.  Default: i <- i-1 cyclically.
inline MomentCoupling couple_from_moments(const std::vector<Series>& H3d,
                                          const std::vector<Series>& M3d,
                                          std::vector<int> source_of_field = {},
                                          double eps = 0.1) {
    MomentCoupling out;
    const int nf = static_cast<int>(H3d.size());
    if (nf == 0 || M3d.size() != H3d.size()) {
        out.reason = "no moment series";
        return out;
    }
    if (source_of_field.empty())
        for (int i = 0; i < nf; ++i) source_of_field.push_back((i + nf - 1) % nf);
    // walk the cycle field0 -> succ(field0) -> ...
    std::vector<int> succ(nf, -1), order;
    for (int i = 0; i < nf; ++i) {
        const int j = source_of_field[i];
        if (j < 0 || j >= nf || succ[j] >= 0) {
            out.reason = "coupling is not a single cycle";
            return out;
        }
        succ[j] = i;
    }
    std::vector<bool> seen(nf, false);
    int walker = 0;
    for (int k = 0; k < nf; ++k) {
        if (walker < 0 || seen[walker]) break;
        seen[walker] = true;
        order.push_back(walker);
        walker = succ[walker];
    }
    if (static_cast<int>(order.size()) != nf || walker != order.front()) {
        out.reason = "coupling is not a single cycle";
        return out;
    }
    const double p_fit = 1.0 + eps;

    std::vector<double> c_fit(nf), a_fit(nf);
    for (int i = 0; i < nf; ++i) {
        const int prev = source_of_field[i];
        std::vector<double> lt, ly;
        for (size_t k = 0; k < M3d[i].size() && k < H3d[prev].size(); ++k) {
            const double t = M3d[i][k].first, M = M3d[i][k].second, H = H3d[prev][k].second;
            if (t <= 1.0 || M <= 0.0 || H <= 0.0) continue;
            lt.push_back(std::log(t));
            ly.push_back(std::log(M) - p_fit * std::log(H));
        }
        if (lt.size() < 6) {
            out.reason = "field " + std::to_string(i) + ": too few positive samples";
            return out;
        }
        auto fit = detail::linear_fit(lt, ly);
        a_fit[i] = -fit.b;
        // conservative constant: lower envelope of M t^alpha / H^p
        double cmin = std::numeric_limits<double>::infinity();
        for (size_t k = 0; k < lt.size(); ++k)
            cmin = std::min(cmin, std::exp(ly[k] + a_fit[i] * lt[k]));
        c_fit[i] = cmin;
        if (!(c_fit[i] > 0) || !std::isfinite(c_fit[i])) {
            out.reason = "field " + std::to_string(i) + ": nonpositive comparison constant";
            return out;
        }
    }

    // find a sample time with H_i and dH_i/dt all positive
    double t_anchor = 0;
    std::vector<double> Hval(nf), Hdot(nf);
    const size_t len = H3d[0].size();
    for (size_t k = len; k-- > 1;) {
        bool ok = true;
        for (int i = 0; i < nf && ok; ++i) {
            if (k >= H3d[i].size()) { ok = false; break; }
            const auto& [t1, h1] = H3d[i][k - 1];
            const auto& [t2, h2] = H3d[i][k];
            Hval[i] = h2;
            Hdot[i] = (h2 - h1) / (t2 - t1);
            ok = h2 > 0 && Hdot[i] > 0 && t2 > 1.0;
        }
        if (ok) { t_anchor = H3d[0][k].first; break; }
    }
    if (t_anchor == 0) {
        out.reason = "no sample time with positive moments and slopes";
        return out;
    }

    // interleave along the cycle as (H_f0', H_f0, H_f1', H_f1, ...): each
    // component then depends on its predecessor, with x_0 := x_{2 nf} = H of
    // the field that sources f0
    GronwallSystem g;
    g.n = 2 * nf;
    g.t0 = t_anchor;
    for (int f : order) {
        g.c.push_back(c_fit[f]);
        g.alpha.push_back(a_fit[f]);
        g.p.push_back(p_fit);
        g.x0.push_back(Hdot[f]);
        g.c.push_back(1.0);
        g.alpha.push_back(0.0);
        g.p.push_back(1.0);
        g.x0.push_back(Hval[f]);
    }
    out.applicable = check_hypotheses(g);
    if (!out.applicable) out.reason = "lemma hypotheses fail for the fitted system";
    out.sys = g;
    return out;
}

}  // namespace wavecrit
