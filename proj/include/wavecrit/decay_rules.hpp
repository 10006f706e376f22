#pragma once

// Translates a WaveSystem into its growth system at null infinity (max type,
// over sigma) and its tail system at timelike infinity (min type, over s),
// then classifies solvability.
//
// Per-term calculus, with A = (n-1)/2 and psi_j ~ v^{sigma_j} toward null
// infinity, ~ t^{-s_j} toward timelike infinity.  A term t^alpha u^beta
// |D phi_j|^q forcing equation i contributes
//
//   sigma_i candidate:  1 - A(q-1) + alpha + q (sigma_j + g0)
//   s_i candidates:     A(q-1) - 1 - alpha - q (sigma_j + g0)          [scri]
//                       A(q-1) - 1 - alpha + q (s_j + h0) - 1 - beta   [interior]
//
// g0 = -1 for dv terms (one extra order of decay toward scri), 0 otherwise;
// h0 = 1 for any derivative (one extra order toward timelike infinity).
// u-weights do not enter sigma candidates: the scri region carries bounded u.

#include "minmax.hpp"
#include "wave_system.hpp"

#include <optional>

namespace wavecrit {

inline const Rat kDefaultEpsilon = Rat(1, 10000);

struct SigmaEntry {
    Rat c;
    Rat gamma;
    int source;
};

struct SEntry {
    Rat scri_base;   // scri candidate = scri_base - q * sigma_source
    Rat interior_c;  // interior candidate = interior_c + q * s_source
    Rat q;
    int source;
};

struct TermContribution {
    SigmaEntry sigma;
    SEntry s;
};

inline TermContribution term_contributions(const NonlinearTerm& t, int n) {
    const Rat A(n - 1, 2);
    const Rat q = t.power;
    const Rat g0 = t.derivative == DerivKind::Dv ? Rat(-1) : Rat(0);
    const Rat h0 = t.derivative == DerivKind::None ? Rat(0) : Rat(1);
    TermContribution out;
    out.sigma = SigmaEntry{Rat(1) - A * (q - 1) + t.t_weight + q * g0, q, t.source};
    out.s.scri_base = A * (q - 1) - 1 - t.t_weight - q * g0;
    out.s.interior_c = A * (q - 1) - 1 - t.t_weight + q * h0 - 1 - t.u_weight;
    out.s.q = q;
    out.s.source = t.source;
    return out;
}

namespace detail {
inline void require_classifiable(const WaveSystem& ws) {
    ws.validate();
    std::vector<bool> has_term(ws.field_count(), false);
    for (const auto& t : ws.terms)
        if (t.coefficient != 0) has_term[t.equation] = true;
    for (int i = 0; i < ws.field_count(); ++i)
        if (!has_term[i] && !ws.data[i].declared)
            throw std::invalid_argument("field '" + ws.fields[i] +
                                        "' has neither terms nor a data spec");
}
}  // namespace detail

inline MaxSystem derive_sigma_system(const WaveSystem& ws) {
    MaxSystem sys;
    sys.d = ws.field_count();
    sys.equations.resize(sys.d);
    for (const auto& t : ws.terms) {
        if (t.coefficient == 0) continue;
        auto c = term_contributions(t, ws.n);
        sys.equations[t.equation].affine.push_back(
            MaxAffine{c.sigma.c, c.sigma.gamma, c.sigma.source});
    }
    for (int i = 0; i < sys.d; ++i)
        if (ws.data[i].kind == DataSpec::Kind::Tail)
            sys.equations[i].constants.push_back(Rat(1) - ws.data[i].tail_exponent);
    return sys;
}

// Fields with no sourcing terms and compactly supported data have no tail at
// all in odd dimensions; in even dimensions every field carries the inherent
// u^{-(n-1)/2} tail, which also caps every tail equation.
inline std::vector<bool> finite_tail_fields(const WaveSystem& ws) {
    std::vector<bool> finite(ws.field_count(), ws.n % 2 == 0);
    for (const auto& t : ws.terms)
        if (t.coefficient != 0) finite[t.equation] = true;
    for (int i = 0; i < ws.field_count(); ++i)
        if (ws.data[i].kind == DataSpec::Kind::Tail) finite[i] = true;
    return finite;
}

struct SSystem {
    MinMaxSystem sys;                // over finite-tail fields only
    std::vector<int> var_of_field;   // -1 marks the infinite-decay sentinel
    std::vector<int> field_of_var;
};

inline SSystem derive_s_system(const WaveSystem& ws, const std::vector<Rat>& sigma) {
    auto finite = finite_tail_fields(ws);
    SSystem out;
    out.var_of_field.assign(ws.field_count(), -1);
    for (int i = 0; i < ws.field_count(); ++i)
        if (finite[i]) {
            out.var_of_field[i] = static_cast<int>(out.field_of_var.size());
            out.field_of_var.push_back(i);
        }
    out.sys.d = static_cast<int>(out.field_of_var.size());
    out.sys.equations.resize(out.sys.d);
    for (const auto& t : ws.terms) {
        if (t.coefficient == 0) continue;
        auto c = term_contributions(t, ws.n);
        const int var = out.var_of_field[t.equation];
        const Rat scri = c.s.scri_base - c.s.q * sigma[t.source];
        if (finite[t.source]) {
            const Rat beta = c.s.interior_c - scri;
            out.sys.equations[var].push_back(
                MinTerm{scri, beta, c.s.q, out.var_of_field[t.source]});
        } else {
            out.sys.equations[var].push_back(MinTerm{scri, Rat(0), Rat(0), var});
        }
    }
    for (int i = 0; i < ws.field_count(); ++i) {
        if (out.var_of_field[i] < 0) continue;
        const int var = out.var_of_field[i];
        if (ws.data[i].kind == DataSpec::Kind::Tail)
            out.sys.equations[var].push_back(
                MinTerm{ws.data[i].tail_exponent - 1, Rat(0), Rat(0), var});
        if (ws.n % 2 == 0)
            out.sys.equations[var].push_back(MinTerm{Rat(ws.n - 1, 2), Rat(0), Rat(0), var});
    }
    return out;
}

struct DerivedSystems {
    MaxSystem sigma_sys;
    bool sigma_bounded = false;
    std::vector<Rat> sigma;          // least solution when bounded
    std::optional<SSystem> s_sys;    // present when sigma is bounded
};

inline DerivedSystems derive_systems(const WaveSystem& ws) {
    detail::require_classifiable(ws);
    DerivedSystems out;
    out.sigma_sys = derive_sigma_system(ws);
    auto res = solve_max_system(out.sigma_sys);
    out.sigma_bounded = res.bounded;
    if (res.bounded) {
        out.sigma = res.sigma;
        out.s_sys = derive_s_system(ws, res.sigma);
    }
    return out;
}

// --- classification -----------------------------------------------------------

struct FieldLogFlags {
    bool scri_log = false;    // scri forcing exponent exactly 1
    bool corner_log = false;  // u-decay of the forcing near the corner exactly 1
};

enum class Verdict { ExpectedStable, ExpectedUnstable, Borderline };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::ExpectedStable: return "expected-stable";
        case Verdict::ExpectedUnstable: return "expected-unstable";
        case Verdict::Borderline: return "borderline";
    }
    return "?";
}

struct DecayPrediction {
    Verdict verdict = Verdict::ExpectedUnstable;
    bool sigma_bounded = false;
    bool s_solvable = false;
    bool sigma_robust = false;
    bool s_robust = false;
    std::vector<Rat> sigma;                // per field, valid iff sigma_bounded
    std::vector<std::optional<Rat>> s;     // per field; nullopt = infinite decay
    std::vector<FieldLogFlags> log_flags;  // per field
    std::vector<Edge> graph;               // in field indices
    bool has_loop = false;
    int iterations_used = 0;
};

inline DecayPrediction classify(const WaveSystem& ws, const Rat& epsilon = kDefaultEpsilon) {
    detail::require_classifiable(ws);
    DecayPrediction pred;
    pred.log_flags.resize(ws.field_count());

    auto sigma_sys = derive_sigma_system(ws);
    auto sig = solve_max_system(sigma_sys);
    pred.iterations_used = sig.iterations_used;
    pred.sigma_bounded = sig.bounded && !sig.undecided;
    if (!pred.sigma_bounded) {
        pred.verdict = Verdict::ExpectedUnstable;
        return pred;
    }
    pred.sigma = sig.sigma;
    pred.sigma_robust = solve_max_system(perturb_up(sigma_sys, epsilon)).bounded;

    auto ss = derive_s_system(ws, pred.sigma);
    MinSolveOptions opts;
    opts.epsilon = epsilon;
    auto rep = solve_min_system(ss.sys, opts);
    pred.iterations_used += rep.iterations_used;
    pred.s_solvable = rep.solvable;
    if (!rep.solvable) {
        pred.verdict = Verdict::ExpectedUnstable;
        return pred;
    }
    pred.s.resize(ws.field_count());
    for (int i = 0; i < ws.field_count(); ++i)
        if (ss.var_of_field[i] >= 0) pred.s[i] = (*rep.solution)[ss.var_of_field[i]];
    pred.s_robust = rep.robust;
    for (const auto& e : rep.graph)
        pred.graph.push_back(Edge{ss.field_of_var[e.from], ss.field_of_var[e.to]});
    pred.has_loop = rep.has_loop;

    for (const auto& t : ws.terms) {
        if (t.coefficient == 0) continue;
        auto c = term_contributions(t, ws.n);
        const Rat qi = c.s.scri_base - c.s.q * pred.sigma[t.source] + 1;
        if (qi == 1) pred.log_flags[t.equation].scri_log = true;
        if (pred.s[t.source]) {
            const Rat qp = c.s.interior_c + c.s.q * *pred.s[t.source] + 2;
            if (qp - qi == 1) pred.log_flags[t.equation].corner_log = true;
        }
    }
    for (int i = 0; i < ws.field_count(); ++i)
        if (ws.data[i].kind == DataSpec::Kind::Tail && ws.data[i].tail_exponent == 1)
            pred.log_flags[i].scri_log = true;

    pred.verdict = (pred.sigma_robust && pred.s_robust) ? Verdict::ExpectedStable
                                                        : Verdict::Borderline;
    return pred;
}

// --- the three alpha columns of the forcing-to-decay table --------------------

enum class Region { N0, NI, Nplus, Compact };

struct TailAlpha {
    enum class Kind { Finite, Infinite, NoSupport };
    Kind kind = Kind::Finite;
    Rat alpha;  // psi ~ t^{-alpha} when finite

    static TailAlpha finite(Rat a) { return TailAlpha{Kind::Finite, std::move(a)}; }
    static TailAlpha infinite() { return TailAlpha{Kind::Infinite, Rat(0)}; }
    static TailAlpha no_support() { return TailAlpha{Kind::NoSupport, Rat(0)}; }
};

struct RegionDecays {
    TailAlpha n0, ni, nplus;
};

// Q is the t-decay exponent of the unrescaled forcing in the given region.
inline RegionDecays tail_from_forcing(Region region, const Rat& Q, int n) {
    const Rat A(n - 1, 2);
    switch (region) {
        case Region::N0:
            return RegionDecays{TailAlpha::finite(Q - A - 2),
                                TailAlpha::finite(rat_min(Rat(0), Q - A - 2)),
                                TailAlpha::finite(Q - A - 2)};
        case Region::NI:
            return RegionDecays{TailAlpha::no_support(),
                                TailAlpha::finite(rat_min(Rat(0), Q - A - 1)),
                                TailAlpha::finite(Q - A - 1)};
        case Region::Nplus:
            return RegionDecays{TailAlpha::no_support(), TailAlpha::finite(Rat(0)),
                                TailAlpha::finite(Q - A - 2)};
        case Region::Compact:
            return RegionDecays{TailAlpha::no_support(), TailAlpha::finite(Rat(0)),
                                TailAlpha::infinite()};
    }
    throw std::invalid_argument("tail_from_forcing: unknown region");
}

}  // namespace wavecrit
