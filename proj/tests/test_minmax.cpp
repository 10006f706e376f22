#include <catch2/catch_amalgamated.hpp>

#include "wavecrit/minmax.hpp"

#include <random>

using namespace wavecrit;

namespace {

// x = a + min(0, b + c x) as a one-equation system
MinMaxSystem scalar_system(const Rat& a, const Rat& b, const Rat& c) {
    MinMaxSystem sys;
    sys.d = 1;
    sys.equations = {{MinTerm{a, b, c, 0}}};
    return sys;
}

// the symmetric 2-field power system in three space dimensions:
// s_i = (q - 2) + min(0, q s_j - 1)
MinMaxSystem two_field_system(const Rat& q) {
    MinMaxSystem sys;
    sys.d = 2;
    sys.equations = {{MinTerm{q - 2, Rat(-1), q, 1}}, {MinTerm{q - 2, Rat(-1), q, 0}}};
    return sys;
}

MinMaxSystem random_system(std::mt19937& rng, int max_d = 4) {
    std::uniform_int_distribution<int> dim(1, max_d);
    std::uniform_int_distribution<int> nterms(1, 3);
    std::uniform_int_distribution<int> num(-30, 30);     // alpha, beta in [-3, 3]
    std::uniform_int_distribution<int> gnum(11, 40);     // gamma in (1, 4]
    MinMaxSystem sys;
    sys.d = dim(rng);
    sys.equations.resize(sys.d);
    std::uniform_int_distribution<int> tgt(0, sys.d - 1);
    for (auto& eq : sys.equations) {
        int k = nterms(rng);
        for (int t = 0; t < k; ++t)
            eq.push_back(MinTerm{Rat(num(rng), 10), Rat(num(rng), 10), Rat(gnum(rng), 10), tgt(rng)});
    }
    return sys;
}

}  // namespace

TEST_CASE("scalar lemma verdicts") {
    auto r1 = solve_scalar_minmax(Rat(1), Rat(-1), Rat(2));
    REQUIRE(r1.solvable);
    REQUIRE(*r1.x == Rat(1));

    auto r2 = solve_scalar_minmax(Rat(0), Rat(0), Rat(2));
    REQUIRE(r2.solvable);
    REQUIRE(*r2.x == Rat(0));

    auto r3 = solve_scalar_minmax(Rat(2, 5), Rat(-1), Rat(2));
    REQUIRE_FALSE(r3.solvable);

    REQUIRE_THROWS_AS(solve_scalar_minmax(Rat(1), Rat(1), Rat(1)), std::invalid_argument);
}

TEST_CASE("unsolvable scalar case has no solution on a fine grid") {
    // independent oracle for (a, b, c) = (2/5, -1, 2): scan x in [-100, 100]
    // with step 1e-3 and confirm x != a + min(0, b + c x) everywhere
    const Rat a(2, 5), b(-1), c(2);
    const Rat step(1, 1000);
    for (Rat x(-100); x <= 100; x += step) {
        Rat rhs = a + rat_min(Rat(0), b + c * x);
        REQUIRE(x != rhs);
    }
}

TEST_CASE("solve_min_system on spec instances") {
    SECTION("scalar lemma case embedded") {
        auto rep = solve_min_system(scalar_system(Rat(1), Rat(-1), Rat(2)));
        REQUIRE(rep.solvable);
        REQUIRE((*rep.solution)[0] == Rat(1));
    }
    SECTION("two coupled fields, q = 3: maximal solution (1, 1)") {
        auto rep = solve_min_system(two_field_system(Rat(3)));
        REQUIRE(rep.solvable);
        REQUIRE((*rep.solution)[0] == Rat(1));
        REQUIRE((*rep.solution)[1] == Rat(1));
        REQUIRE(rep.graph.empty());  // min attained by the constant entries
        REQUIRE_FALSE(rep.has_loop);
    }
    SECTION("two coupled fields, q = 11/5: unsolvable") {
        auto rep = solve_min_system(two_field_system(Rat(11, 5)));
        REQUIRE_FALSE(rep.solvable);
        // scalar reduction: b + c a = -1 + (11/5)(1/5) < 0
        REQUIRE_FALSE(solve_scalar_minmax(Rat(1, 5), Rat(-1), Rat(11, 5)).solvable);
    }
}

TEST_CASE("monotone iteration is componentwise non-increasing") {
    std::mt19937 rng(42);
    for (int round = 0; round < 200; ++round) {
        auto sys = random_system(rng);
        std::vector<Rat> x(sys.d);
        for (int i = 0; i < sys.d; ++i) {
            Rat a = sys.equations[i].front().alpha;
            for (const auto& t : sys.equations[i]) a = rat_min(a, t.alpha);
            x[i] = a;
        }
        for (int k = 0; k < 30; ++k) {
            std::vector<Rat> nx(sys.d);
            for (int i = 0; i < sys.d; ++i) nx[i] = eval_min_equation(sys.equations[i], x);
            for (int i = 0; i < sys.d; ++i) REQUIRE(nx[i] <= x[i]);
            x = nx;
        }
    }
}

TEST_CASE("exact feasibility on spec instances") {
    SECTION("x <= 1 together with x <= 2x is feasible (x = 0 works)") {
        MinMaxSystem sys;
        sys.d = 1;
        sys.equations = {{MinTerm{Rat(1), Rat(-1), Rat(2), 0}}};
        // candidates are 1 and 2x; {x <= 1, x <= 2x} has x = 0
        REQUIRE(check_feasibility_exact(sys));
    }
    SECTION("the q = 11/5 two-field system is infeasible") {
        REQUIRE_FALSE(check_feasibility_exact(two_field_system(Rat(11, 5))));
    }
}

TEST_CASE("iteration agrees with the exact oracle on random systems") {
    std::mt19937 rng(20240811);
    int decided = 0;
    for (int round = 0; round < 1000; ++round) {
        auto sys = random_system(rng);
        auto it = iterate_min(sys, kDefaultMaxIter, default_min_divergence_bound(sys));
        bool exact = check_feasibility_exact(sys);
        if (it.status == IterStatus::Decided) {
            ++decided;
            REQUIRE(exact);
        } else if (it.status == IterStatus::Diverged) {
            ++decided;
            REQUIRE_FALSE(exact);
        }
    }
    REQUIRE(decided > 900);  // iteration decides nearly everything at gamma > 1
}

TEST_CASE("maximal solution dominates feasible grid points") {
    std::mt19937 rng(7);
    int checked = 0;
    while (checked < 40) {
        auto sys = random_system(rng, 2);
        auto sol = maximal_solution_exact(sys);
        if (!sol) continue;
        ++checked;
        const Rat step(1, 4);
        for (Rat x0 = (*sol)[0] - 3; x0 <= (*sol)[0] + 3; x0 += step) {
            for (Rat x1 = (sys.d > 1 ? (*sol)[1] - 3 : Rat(0));
                 x1 <= (sys.d > 1 ? (*sol)[1] + 3 : Rat(0)); x1 += step) {
                std::vector<Rat> y{x0};
                if (sys.d > 1) y.push_back(x1);
                bool feas = true;
                for (int i = 0; i < sys.d && feas; ++i)
                    feas = y[i] <= eval_min_equation(sys.equations[i], y);
                if (feas)
                    for (int i = 0; i < sys.d; ++i) REQUIRE((*sol)[i] >= y[i]);
                if (sys.d == 1) break;
            }
        }
    }
}

TEST_CASE("scalar lemma agrees with one-equation embeddings on a lattice") {
    for (int an = -8; an <= 8; ++an)
        for (int bn = -8; bn <= 8; ++bn)
            for (int cn = 11; cn <= 35; cn += 6) {
                Rat a(an, 4), b(bn, 4), c(cn, 10);
                auto lem = solve_scalar_minmax(a, b, c);
                MinSolveOptions opts;
                opts.want_robustness = false;
                auto rep = solve_min_system(scalar_system(a, b, c), opts);
                REQUIRE(lem.solvable == rep.solvable);
                if (lem.solvable) REQUIRE((*rep.solution)[0] >= *lem.x);
            }
}

TEST_CASE("max systems") {
    SECTION("single bounded equation") {
        // s = max(0, -1/2 + 5/2 s) settles at 0
        MaxSystem sys;
        sys.d = 1;
        sys.equations = {MaxEquation{{}, {MaxAffine{Rat(-1, 2), Rat(5, 2), 0}}}};
        auto res = solve_max_system(sys);
        REQUIRE(res.bounded);
        REQUIRE(res.sigma[0] == 0);
    }
    SECTION("single divergent equation") {
        // s = max(0, 1/2 + 3/2 s) grows without bound
        MaxSystem sys;
        sys.d = 1;
        sys.equations = {MaxEquation{{}, {MaxAffine{Rat(1, 2), Rat(3, 2), 0}}}};
        auto res = solve_max_system(sys);
        REQUIRE_FALSE(res.bounded);
        REQUIRE_FALSE(res.undecided);
    }
    SECTION("empty equation pins sigma at 0") {
        MaxSystem sys;
        sys.d = 1;
        sys.equations = {MaxEquation{}};
        auto res = solve_max_system(sys);
        REQUIRE(res.bounded);
        REQUIRE(res.sigma[0] == 0);
    }
}

TEST_CASE("dependency graph construction") {
    SECTION("two-field q = 3 instance has no edges") {
        auto sys = two_field_system(Rat(3));
        auto edges = build_dependency_graph(sys, {Rat(1), Rat(1)});
        REQUIRE(edges.empty());
    }
    SECTION("chain instance records the active affine edge") {
        // x0 = 1 + min(0, -3 + 2 x1), x1 = 1; solution (0, 1), edge 1 -> 0
        MinMaxSystem sys;
        sys.d = 2;
        sys.equations = {{MinTerm{Rat(1), Rat(-3), Rat(2), 1}}, {MinTerm{Rat(1), Rat(0), Rat(0), 1}}};
        auto edges = build_dependency_graph(sys, {Rat(0), Rat(1)});
        REQUIRE(edges.size() == 1);
        REQUIRE(edges[0].from == 1);
        REQUIRE(edges[0].to == 0);
    }
    SECTION("constant-only equations give an empty graph") {
        MinMaxSystem sys;
        sys.d = 1;
        sys.equations = {{MinTerm{Rat(2), Rat(0), Rat(0), 0}}};
        auto edges = build_dependency_graph(sys, {Rat(2)});
        REQUIRE(edges.empty());
    }
    SECTION("non-solutions are rejected") {
        auto sys = two_field_system(Rat(3));
        REQUIRE_THROWS_AS(build_dependency_graph(sys, {Rat(1), Rat(0)}), std::invalid_argument);
        // (0, 0) is a genuine (non-maximal) solution and must be accepted
        REQUIRE_NOTHROW(build_dependency_graph(sys, {Rat(0), Rat(0)}));
    }
}

TEST_CASE("cycle detection") {
    REQUIRE_FALSE(detect_loops({}, 3));
    REQUIRE(detect_loops({{0, 1}, {1, 0}}, 2));
    REQUIRE_FALSE(detect_loops({{0, 1}, {1, 2}}, 3));
}

TEST_CASE("robustness margin") {
    SECTION("well inside the solvable region") {
        REQUIRE(robustness_margin(two_field_system(Rat(3)), Rat(1, 20)));
    }
    SECTION("exactly critical coefficients are not robust") {
        // b + c a = 0 at (a, b, c) = (1/2, -1, 2)
        auto sys = scalar_system(Rat(1, 2), Rat(-1), Rat(2));
        REQUIRE(check_feasibility_exact(sys));
        REQUIRE_FALSE(robustness_margin(sys, Rat(1, 100)));
    }
    SECTION("eps = 0 reduces to exact feasibility") {
        REQUIRE(robustness_margin(two_field_system(Rat(3)), Rat(0)) ==
                check_feasibility_exact(two_field_system(Rat(3))));
        REQUIRE(robustness_margin(two_field_system(Rat(11, 5)), Rat(0)) ==
                check_feasibility_exact(two_field_system(Rat(11, 5))));
    }
}

TEST_CASE("robust systems with gamma > 1 have loop-free graphs") {
    std::mt19937 rng(99);
    int robust_count = 0;
    for (int round = 0; round < 300 && robust_count < 40; ++round) {
        auto sys = random_system(rng, 3);
        MinSolveOptions opts;
        opts.epsilon = Rat(1, 1000);
        auto rep = solve_min_system(sys, opts);
        if (!rep.solvable || !rep.robust) continue;
        ++robust_count;
        REQUIRE_FALSE(rep.has_loop);
    }
    REQUIRE(robust_count >= 20);
}
