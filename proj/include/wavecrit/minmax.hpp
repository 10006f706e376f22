#pragma once

// Min/max fixed-point systems over exponent vectors.
//
// MinMaxSystem:  x_i = min_j ( alpha_ij , alpha_ij + beta_ij + gamma_ij * x_j )
// MaxSystem:     s_i = max ( 0, constants..., c_t + gamma_t * s_j ... )
//
// Monotone iteration is the fast path; an exact Fourier-Motzkin feasibility
// oracle over the equivalent inequality system x_i <= F_i[x] is the authority
// whenever iteration cannot decide.  All arithmetic is exact rational.

#include "rational.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace wavecrit {

struct MinTerm {
    Rat alpha;  // constant candidate
    Rat beta;   // affine candidate is alpha + beta + gamma * x[target]
    Rat gamma;  // >= 0
    int target = 0;
};

struct MinMaxSystem {
    int d = 0;
    std::vector<std::vector<MinTerm>> equations;  // one candidate list per unknown

    void validate() const {
        if (d <= 0 || static_cast<int>(equations.size()) != d)
            throw std::invalid_argument("minmax: equation count must equal d");
        for (const auto& eq : equations) {
            if (eq.empty()) throw std::invalid_argument("minmax: empty equation");
            for (const auto& t : eq) {
                if (t.gamma < 0) throw std::invalid_argument("minmax: gamma < 0");
                if (t.target < 0 || t.target >= d)
                    throw std::invalid_argument("minmax: target out of range");
            }
        }
    }
};

struct MaxAffine {
    Rat c;
    Rat gamma;  // > 0
    int target = 0;
};

struct MaxEquation {
    std::vector<Rat> constants;    // extra constant candidates (0 is implicit)
    std::vector<MaxAffine> affine;
};

struct MaxSystem {
    int d = 0;
    std::vector<MaxEquation> equations;

    void validate() const {
        if (d <= 0 || static_cast<int>(equations.size()) != d)
            throw std::invalid_argument("maxsys: equation count must equal d");
        for (const auto& eq : equations)
            for (const auto& t : eq.affine) {
                if (t.gamma <= 0) throw std::invalid_argument("maxsys: gamma <= 0");
                if (t.target < 0 || t.target >= d)
                    throw std::invalid_argument("maxsys: target out of range");
            }
    }
};

enum class IterStatus { Decided, Diverged, Undecided };

constexpr int kDefaultMaxIter = 1000;

inline Rat default_min_divergence_bound(const MinMaxSystem& sys) {
    Rat m(0);
    for (const auto& eq : sys.equations)
        for (const auto& t : eq) m = rat_max(m, rat_abs(t.alpha) + rat_abs(t.beta));
    return Rat(-10000) * (Rat(1) + m) * sys.d;
}

inline Rat default_max_divergence_bound(const MaxSystem& sys) {
    Rat m(0);
    for (const auto& eq : sys.equations) {
        for (const auto& c : eq.constants) m = rat_max(m, rat_abs(c));
        for (const auto& t : eq.affine) m = rat_max(m, rat_abs(t.c));
    }
    return Rat(10000) * (Rat(1) + m) * sys.d;
}

// --- scalar lemma: x = a + min(0, b + c x), c > 1 ---------------------------

struct ScalarMinMaxResult {
    bool solvable = false;
    std::optional<Rat> x;
};

inline ScalarMinMaxResult solve_scalar_minmax(const Rat& a, const Rat& b, const Rat& c) {
    if (c <= 1) throw std::invalid_argument("solve_scalar_minmax requires c > 1");
    ScalarMinMaxResult r;
    r.solvable = b + c * a >= 0;
    if (r.solvable) r.x = a;  // min attained at the 0 branch
    return r;
}

// --- monotone iteration ------------------------------------------------------

inline Rat eval_min_equation(const std::vector<MinTerm>& eq, const std::vector<Rat>& x) {
    Rat best = eq.front().alpha;
    for (const auto& t : eq) {
        best = rat_min(best, t.alpha);
        best = rat_min(best, t.alpha + t.beta + t.gamma * x[t.target]);
    }
    return best;
}

struct MinIterationResult {
    IterStatus status = IterStatus::Undecided;
    std::vector<Rat> x;  // last iterate (the maximal solution when Decided)
    int iterations = 0;
};

inline MinIterationResult iterate_min(const MinMaxSystem& sys, int max_iter,
                                      const Rat& divergence_bound) {
    MinIterationResult res;
    std::vector<Rat> x(sys.d);
    for (int i = 0; i < sys.d; ++i) {
        Rat a = sys.equations[i].front().alpha;
        for (const auto& t : sys.equations[i]) a = rat_min(a, t.alpha);
        x[i] = a;
    }
    for (int k = 0; k < max_iter; ++k) {
        std::vector<Rat> nx(sys.d);
        bool same = true, below = false;
        for (int i = 0; i < sys.d; ++i) {
            nx[i] = eval_min_equation(sys.equations[i], x);
            if (nx[i] != x[i]) same = false;
            if (nx[i] < divergence_bound) below = true;
        }
        res.iterations = k + 1;
        if (same) {
            res.status = IterStatus::Decided;
            res.x = std::move(nx);
            return res;
        }
        x = std::move(nx);
        if (below) {
            res.status = IterStatus::Diverged;
            res.x = std::move(x);
            return res;
        }
    }
    res.status = IterStatus::Undecided;
    res.x = std::move(x);
    return res;
}

struct MaxIterationResult {
    IterStatus status = IterStatus::Undecided;  // Decided = bounded, Diverged = unbounded
    std::vector<Rat> sigma;
    int iterations = 0;
};

inline MaxIterationResult iterate_max(const MaxSystem& sys, int max_iter,
                                      const Rat& divergence_bound) {
    MaxIterationResult res;
    std::vector<Rat> x(sys.d, Rat(0));
    for (int k = 0; k < max_iter; ++k) {
        std::vector<Rat> nx(sys.d);
        bool same = true, above = false;
        for (int i = 0; i < sys.d; ++i) {
            Rat best(0);
            for (const auto& c : sys.equations[i].constants) best = rat_max(best, c);
            for (const auto& t : sys.equations[i].affine)
                best = rat_max(best, t.c + t.gamma * x[t.target]);
            nx[i] = best;
            if (nx[i] != x[i]) same = false;
            if (nx[i] > divergence_bound) above = true;
        }
        res.iterations = k + 1;
        if (same) {
            res.status = IterStatus::Decided;
            res.sigma = std::move(nx);
            return res;
        }
        x = std::move(nx);
        if (above) {
            res.status = IterStatus::Diverged;
            res.sigma = std::move(x);
            return res;
        }
    }
    res.status = IterStatus::Undecided;
    res.sigma = std::move(x);
    return res;
}

// --- exact feasibility of x_i <= F_i[x] (Fourier-Motzkin) --------------------

namespace detail {

struct LinIneq {
    std::vector<Rat> a;  // a . x <= b
    Rat b;
};

inline std::vector<LinIneq> inequalities_of(const MinMaxSystem& sys) {
    std::vector<LinIneq> out;
    for (int i = 0; i < sys.d; ++i) {
        for (const auto& t : sys.equations[i]) {
            LinIneq c1{std::vector<Rat>(sys.d, Rat(0)), t.alpha};
            c1.a[i] = 1;
            out.push_back(std::move(c1));
            LinIneq c2{std::vector<Rat>(sys.d, Rat(0)), t.alpha + t.beta};
            c2.a[i] += 1;
            c2.a[t.target] -= t.gamma;
            out.push_back(std::move(c2));
        }
    }
    return out;
}

inline void normalize(LinIneq& c) {
    Rat lead(0);
    for (const auto& v : c.a)
        if (v != 0) { lead = rat_abs(v); break; }
    if (lead == 0 || lead == 1) return;
    for (auto& v : c.a) v /= lead;
    c.b /= lead;
}

// Eliminates variables one by one; returns false iff the system is infeasible.
// If `keep` >= 0, that variable is left alone and `out` receives the surviving
// one-variable constraints on it.
inline bool fourier_motzkin(std::vector<LinIneq> cons, int d, int keep,
                            std::vector<LinIneq>* out) {
    auto prune = [&](std::vector<LinIneq>& v) {
        std::map<std::vector<Rat>, Rat> best;
        for (auto& c : v) {
            normalize(c);
            auto it = best.find(c.a);
            if (it == best.end())
                best.emplace(c.a, c.b);
            else
                it->second = rat_min(it->second, c.b);
        }
        v.clear();
        for (auto& [a, b] : best) v.push_back(LinIneq{a, b});
    };
    prune(cons);
    for (int step = 0; step < d; ++step) {
        // constant rows decide feasibility as soon as they appear
        for (const auto& c : cons) {
            bool allzero = true;
            for (const auto& v : c.a)
                if (v != 0) { allzero = false; break; }
            if (allzero && c.b < 0) return false;
        }
        // pick the variable with the fewest pos*neg combinations
        int var = -1;
        long best_cost = -1;
        for (int k = 0; k < d; ++k) {
            if (k == keep) continue;
            long pos = 0, neg = 0, any = 0;
            for (const auto& c : cons) {
                if (c.a[k] > 0) ++pos;
                else if (c.a[k] < 0) ++neg;
                if (c.a[k] != 0) ++any;
            }
            if (any == 0) continue;
            long cost = pos * neg;
            if (var < 0 || cost < best_cost) { var = k; best_cost = cost; }
        }
        if (var < 0) break;  // nothing left to eliminate
        std::vector<LinIneq> next, pos, neg;
        for (auto& c : cons) {
            if (c.a[var] > 0) pos.push_back(std::move(c));
            else if (c.a[var] < 0) neg.push_back(std::move(c));
            else next.push_back(std::move(c));
        }
        for (const auto& p : pos)
            for (const auto& n : neg) {
                LinIneq m{std::vector<Rat>(d, Rat(0)), Rat(0)};
                const Rat pc = p.a[var], nc = -n.a[var];
                for (int k = 0; k < d; ++k) m.a[k] = p.a[k] * nc + n.a[k] * pc;
                m.b = p.b * nc + n.b * pc;
                m.a[var] = 0;
                next.push_back(std::move(m));
            }
        cons = std::move(next);
        prune(cons);
    }
    for (const auto& c : cons) {
        bool allzero = true;
        for (int k = 0; k < d; ++k)
            if (k != keep && c.a[k] != 0) { allzero = false; break; }
        if (!allzero) continue;  // unreachable; every other var was eliminated
        if (keep >= 0 && c.a[keep] != 0) {
            if (out) out->push_back(c);
            continue;
        }
        if (c.b < 0) return false;
    }
    return true;
}

}  // namespace detail

inline bool check_feasibility_exact(const MinMaxSystem& sys) {
    sys.validate();
    auto cons = detail::inequalities_of(sys);
    return detail::fourier_motzkin(std::move(cons), sys.d, -1, nullptr);
}

// Componentwise-largest feasible point of {x <= F[x]}, which is the maximal
// solution of the equation when the set is nonempty.
inline std::optional<std::vector<Rat>> maximal_solution_exact(const MinMaxSystem& sys) {
    sys.validate();
    std::vector<Rat> x(sys.d);
    for (int k = 0; k < sys.d; ++k) {
        std::vector<detail::LinIneq> bounds;
        auto cons = detail::inequalities_of(sys);
        if (!detail::fourier_motzkin(std::move(cons), sys.d, k, &bounds)) return std::nullopt;
        bool have_upper = false;
        Rat upper(0), lower(0);
        bool have_lower = false;
        for (const auto& c : bounds) {
            Rat bound = c.b / c.a[k];
            if (c.a[k] > 0) {
                upper = have_upper ? rat_min(upper, bound) : bound;
                have_upper = true;
            } else {
                lower = have_lower ? rat_max(lower, bound) : bound;
                have_lower = true;
            }
        }
        if (!have_upper) return std::nullopt;  // cannot happen: x_k <= alpha_kj
        if (have_lower && lower > upper) return std::nullopt;
        x[k] = upper;
    }
    // sanity: the componentwise supremum is itself a fixed point
    for (int i = 0; i < sys.d; ++i)
        if (eval_min_equation(sys.equations[i], x) != x[i])
            throw std::logic_error("maximal_solution_exact: projection is not a fixed point");
    return x;
}

// --- dependency graph and loops ---------------------------------------------

struct Edge {
    int from = 0;  // j
    int to = 0;    // i; equation i's minimum is attained by an affine term on x_j
};

inline std::vector<Edge> build_dependency_graph(const MinMaxSystem& sys,
                                                const std::vector<Rat>& x) {
    sys.validate();
    if (static_cast<int>(x.size()) != sys.d)
        throw std::invalid_argument("dependency graph: wrong solution size");
    for (int i = 0; i < sys.d; ++i)
        if (eval_min_equation(sys.equations[i], x) != x[i])
            throw std::invalid_argument("dependency graph: point does not satisfy the system");
    std::vector<Edge> edges;
    for (int i = 0; i < sys.d; ++i) {
        for (const auto& t : sys.equations[i]) {
            if (t.gamma == 0) continue;  // constant in disguise, no coupling
            if (t.alpha + t.beta + t.gamma * x[t.target] == x[i])
                edges.push_back(Edge{t.target, i});  // ties recorded on purpose
        }
    }
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
        return a.from != b.from ? a.from < b.from : a.to < b.to;
    });
    edges.erase(std::unique(edges.begin(), edges.end(),
                            [](const Edge& a, const Edge& b) {
                                return a.from == b.from && a.to == b.to;
                            }),
                edges.end());
    return edges;
}

inline bool detect_loops(const std::vector<Edge>& edges, int d) {
    std::vector<std::vector<int>> adj(d);
    for (const auto& e : edges) adj[e.from].push_back(e.to);
    std::vector<int> color(d, 0);  // 0 = white, 1 = on stack, 2 = done
    for (int s = 0; s < d; ++s) {
        if (color[s]) continue;
        std::vector<std::pair<int, size_t>> stack{{s, 0}};
        color[s] = 1;
        while (!stack.empty()) {
            auto& [v, idx] = stack.back();
            if (idx < adj[v].size()) {
                int w = adj[v][idx++];
                if (color[w] == 1) return true;
                if (color[w] == 0) {
                    color[w] = 1;
                    stack.push_back({w, 0});
                }
            } else {
                color[v] = 2;
                stack.pop_back();
            }
        }
    }
    return false;
}

// --- robustness under coefficient perturbation -------------------------------

namespace detail {

inline bool feasible_fast(const MinMaxSystem& sys, int max_iter, const Rat& bound) {
    auto it = iterate_min(sys, max_iter, bound);
    if (it.status == IterStatus::Decided) return true;
    if (it.status == IterStatus::Diverged) return false;
    return check_feasibility_exact(sys);
}

// coefficient slots: alpha of every term, beta/gamma of coupled terms
struct CoeffSlot {
    int eq, term, which;  // which: 0 = alpha, 1 = beta, 2 = gamma
};

inline std::vector<CoeffSlot> perturbable_slots(const MinMaxSystem& sys) {
    std::vector<CoeffSlot> slots;
    for (int i = 0; i < sys.d; ++i)
        for (int t = 0; t < static_cast<int>(sys.equations[i].size()); ++t) {
            slots.push_back({i, t, 0});
            if (sys.equations[i][t].gamma > 0) {
                slots.push_back({i, t, 1});
                slots.push_back({i, t, 2});
            }
        }
    return slots;
}

inline MinMaxSystem perturbed(const MinMaxSystem& sys, const std::vector<CoeffSlot>& slots,
                              uint64_t mask, const Rat& eps) {
    MinMaxSystem p = sys;
    for (size_t k = 0; k < slots.size(); ++k) {
        const Rat delta = (mask >> k) & 1u ? eps : -eps;
        auto& term = p.equations[slots[k].eq][slots[k].term];
        switch (slots[k].which) {
            case 0: term.alpha += delta; break;
            case 1: term.beta += delta; break;
            case 2: term.gamma = rat_max(Rat(0), term.gamma + delta); break;
        }
    }
    return p;
}

}  // namespace detail

constexpr int kRobustCornerCap = 24;  // beyond this, fall back to sampled corners

inline bool robustness_margin(const MinMaxSystem& sys, const Rat& eps,
                              int max_iter = kDefaultMaxIter) {
    sys.validate();
    if (eps < 0) throw std::invalid_argument("robustness_margin: eps < 0");
    if (eps == 0) return check_feasibility_exact(sys);
    const Rat bound = default_min_divergence_bound(sys) - rat_abs(eps) * Rat(100);
    if (!detail::feasible_fast(sys, max_iter, bound)) return false;
    auto slots = detail::perturbable_slots(sys);
    if (static_cast<int>(slots.size()) <= kRobustCornerCap) {
        const uint64_t corners = uint64_t(1) << slots.size();
        for (uint64_t mask = 0; mask < corners; ++mask)
            if (!detail::feasible_fast(detail::perturbed(sys, slots, mask, eps), max_iter, bound))
                return false;
        return true;
    }
    std::mt19937_64 rng(0x77617665u);  // fixed seed: sampled fallback is deterministic
    std::uniform_int_distribution<uint64_t> dist;
    for (int k = 0; k < 4096; ++k) {
        uint64_t mask = k == 0 ? 0u : (k == 1 ? ~uint64_t(0) : dist(rng));
        if (!detail::feasible_fast(detail::perturbed(sys, slots, mask, eps), max_iter, bound))
            return false;
    }
    return true;
}

// --- packaged solvers ---------------------------------------------------------

struct FixedPointReport {
    bool solvable = false;
    bool undecided_by_iteration = false;  // exact oracle supplied the verdict
    std::optional<std::vector<Rat>> solution;  // maximal solution when solvable
    std::vector<Edge> graph;
    bool has_loop = false;
    bool robust = false;
    int iterations_used = 0;
};

struct MinSolveOptions {
    int max_iter = kDefaultMaxIter;
    std::optional<Rat> divergence_bound;
    Rat epsilon = Rat(1, 10000);  // robustness scale
    bool want_robustness = true;
};

inline FixedPointReport solve_min_system(const MinMaxSystem& sys,
                                         const MinSolveOptions& opts = {}) {
    sys.validate();
    const Rat bound = opts.divergence_bound ? *opts.divergence_bound
                                            : default_min_divergence_bound(sys);
    FixedPointReport rep;
    auto it = iterate_min(sys, opts.max_iter, bound);
    rep.iterations_used = it.iterations;
    switch (it.status) {
        case IterStatus::Decided:
            rep.solvable = true;
            rep.solution = it.x;
            break;
        case IterStatus::Diverged:
            rep.solvable = false;
            break;
        case IterStatus::Undecided: {
            rep.undecided_by_iteration = true;
            auto sol = maximal_solution_exact(sys);
            rep.solvable = sol.has_value();
            if (sol) rep.solution = *sol;
            break;
        }
    }
    if (rep.solvable) {
        rep.graph = build_dependency_graph(sys, *rep.solution);
        rep.has_loop = detect_loops(rep.graph, sys.d);
        if (opts.want_robustness) rep.robust = robustness_margin(sys, opts.epsilon, opts.max_iter);
    }
    return rep;
}

struct MaxSolveResult {
    bool bounded = false;
    bool undecided = false;
    std::vector<Rat> sigma;  // least solution when bounded
    int iterations_used = 0;
};

inline MaxSolveResult solve_max_system(const MaxSystem& sys, int max_iter = kDefaultMaxIter,
                                       std::optional<Rat> divergence_bound = std::nullopt) {
    sys.validate();
    const Rat bound = divergence_bound ? *divergence_bound : default_max_divergence_bound(sys);
    auto it = iterate_max(sys, max_iter, bound);
    MaxSolveResult res;
    res.iterations_used = it.iterations;
    if (it.status == IterStatus::Decided) {
        res.bounded = true;
        res.sigma = it.sigma;
    } else if (it.status == IterStatus::Diverged) {
        res.bounded = false;
    } else {
        res.undecided = true;
    }
    return res;
}

// Worst-case upward perturbation of a max system (monotone in every
// coefficient once sigma >= 0, so the all-up corner decides robustness).
inline MaxSystem perturb_up(const MaxSystem& sys, const Rat& eps) {
    MaxSystem p = sys;
    for (auto& eq : p.equations) {
        for (auto& c : eq.constants) c += eps;
        for (auto& t : eq.affine) {
            t.c += eps;
            t.gamma += eps;
        }
    }
    return p;
}

}  // namespace wavecrit
