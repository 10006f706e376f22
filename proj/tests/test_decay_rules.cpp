#include <catch2/catch_amalgamated.hpp>

#include "wavecrit/catalog.hpp"
#include "wavecrit/decay_rules.hpp"

#include <algorithm>
#include <random>

using namespace wavecrit;

namespace {

WaveSystem make_system(int n, std::vector<NonlinearTerm> terms, int nfields,
                       std::vector<DataSpec> data = {}) {
    WaveSystem ws;
    ws.n = n;
    for (int i = 0; i < nfields; ++i) ws.fields.push_back("f" + std::to_string(i));
    ws.terms = std::move(terms);
    if (data.empty()) {
        data.resize(nfields);
        for (auto& d : data) d.declared = true;
    }
    ws.data = std::move(data);
    return ws;
}

WaveSystem strauss(int n, const Rat& q) {
    return make_system(n, {NonlinearTerm{0, 0, DerivKind::None, q}}, 1);
}

WaveSystem glassey(int n, const Rat& q) {
    return make_system(n, {NonlinearTerm{0, 0, DerivKind::Dt, q}}, 1);
}

WaveSystem dv_problem(int n, const Rat& q) {
    return make_system(n, {NonlinearTerm{0, 0, DerivKind::Dv, q}}, 1);
}

WaveSystem two_strauss(int n, const Rat& q1, const Rat& q2) {
    return make_system(
        n, {NonlinearTerm{0, 1, DerivKind::None, q1}, NonlinearTerm{1, 0, DerivKind::None, q2}}, 2);
}

WaveSystem sg_system(int n, const Rat& q1, const Rat& q2) {
    return make_system(
        n, {NonlinearTerm{0, 1, DerivKind::None, q1}, NonlinearTerm{1, 0, DerivKind::Dt, q2}}, 2);
}

WaveSystem sg_scalar(int n, const Rat& q1, const Rat& q2) {
    return make_system(
        n, {NonlinearTerm{0, 0, DerivKind::Dt, q1}, NonlinearTerm{0, 0, DerivKind::None, q2}}, 1);
}

WaveSystem strauss_null(int n, const Rat& q1, const Rat& q2) {
    return make_system(n,
                       {NonlinearTerm{0, 1, DerivKind::None, q1},
                        NonlinearTerm{1, 0, DerivKind::Dt, Rat(n + 1, n - 1)},
                        NonlinearTerm{1, 0, DerivKind::None, q2}},
                       2);
}

WaveSystem strauss_with_tail(const Rat& q1, const Rat& q_data) {
    DataSpec d;
    d.kind = DataSpec::Kind::Tail;
    d.tail_exponent = q_data;
    d.declared = true;
    return make_system(3, {NonlinearTerm{0, 0, DerivKind::None, q1}}, 1, {d});
}

}  // namespace

TEST_CASE("per-term contributions reproduce the printed equations") {
    const int n = 3;
    const Rat A(n - 1, 2);
    SECTION("undifferentiated power") {
        for (Rat q : {Rat(3), Rat(5, 2), Rat(11, 5)}) {
            auto c = term_contributions(NonlinearTerm{0, 0, DerivKind::None, q}, n);
            REQUIRE(c.sigma.c == 1 - A * (q - 1));
            REQUIRE(c.sigma.gamma == q);
            REQUIRE(c.s.scri_base == A * (q - 1) - 1);
            REQUIRE(c.s.interior_c == A * (q - 1) - 2);  // + q s_j reads q s_j - 1 inside the min
        }
    }
    SECTION("time derivative") {
        const Rat q(2);
        auto c = term_contributions(NonlinearTerm{0, 0, DerivKind::Dt, q}, n);
        REQUIRE(c.sigma.c == 1 - A * (q - 1));
        REQUIRE(c.s.scri_base == A * (q - 1) - 1);
        REQUIRE(c.s.interior_c == A * (q - 1) - 2 + q);  // q(s+1) - 1 inside the min
    }
    SECTION("outgoing derivative gains one order toward scri") {
        const Rat q(3, 2);
        auto c = term_contributions(NonlinearTerm{0, 0, DerivKind::Dv, q}, n);
        REQUIRE(c.sigma.c == 1 - A * (q - 1) - q);
        REQUIRE(c.s.scri_base == A * (q - 1) - 1 + q);
        REQUIRE(c.s.interior_c == A * (q - 1) - 2 + q);
    }
    SECTION("t and u weights") {
        const Rat q(2), al(1, 2), be(1, 3);
        auto c = term_contributions(NonlinearTerm{0, 0, DerivKind::Dt, q, Rat(1), al, be}, n);
        REQUIRE(c.sigma.c == 1 - A * (q - 1) + al);
        REQUIRE(c.s.scri_base == A * (q - 1) - 1 - al);
        REQUIRE(c.s.interior_c == A * (q - 1) - 2 + q - al - be);
    }
}

TEST_CASE("table consistency between forcing rows and term contributions") {
    std::mt19937 rng(5);
    std::uniform_int_distribution<int> num(-20, 40);
    for (int round = 0; round < 100; ++round) {
        NonlinearTerm t{0, 0, static_cast<DerivKind>(round % 4), Rat(num(rng) + 25, 10),
                        Rat(1), Rat(num(rng), 10), Rat(num(rng), 10)};
        const int n = 3 + (round % 3);
        const Rat A(n - 1, 2);
        auto c = term_contributions(t, n);
        const Rat g0 = t.derivative == DerivKind::Dv ? Rat(-1) : Rat(0);
        const Rat h0 = t.derivative == DerivKind::None ? Rat(0) : Rat(1);
        // scri candidate at sigma_j = 0 equals the tail of a forcing with the
        // term's unrescaled v-decay supported near scri
        const Rat Q_scri = t.power * A - t.power * g0 - t.t_weight;
        auto row = tail_from_forcing(Region::NI, Q_scri, n);
        REQUIRE(row.nplus.kind == TailAlpha::Kind::Finite);
        REQUIRE(row.nplus.alpha == c.s.scri_base);
        // interior candidate at a sample tail s_j matches the interior forcing row
        const Rat s_j(num(rng), 20);
        const Rat Q_int = t.power * (A + s_j + h0) - t.t_weight - t.u_weight;
        auto row2 = tail_from_forcing(Region::Nplus, Q_int, n);
        REQUIRE(row2.nplus.alpha == c.s.interior_c + t.power * s_j);
    }
}

TEST_CASE("forcing table rows") {
    const Rat q(4);
    auto ni = tail_from_forcing(Region::NI, q, 3);
    REQUIRE(ni.n0.kind == TailAlpha::Kind::NoSupport);
    REQUIRE(ni.ni.alpha == rat_min(Rat(0), q - 2));
    REQUIRE(ni.nplus.alpha == q - 2);
    auto np = tail_from_forcing(Region::Nplus, q, 3);
    REQUIRE(np.ni.alpha == 0);
    REQUIRE(np.nplus.alpha == q - 3);
    auto iv = tail_from_forcing(Region::Compact, q, 3);
    REQUIRE(iv.nplus.kind == TailAlpha::Kind::Infinite);
    REQUIRE(iv.ni.alpha == 0);
    auto n0 = tail_from_forcing(Region::N0, q, 5);
    REQUIRE(n0.n0.alpha == q - 4);
    REQUIRE(n0.nplus.alpha == q - 4);
}

TEST_CASE("scalar power problem across the critical value") {
    REQUIRE(classify(strauss(3, Rat(241, 100))).verdict == Verdict::ExpectedUnstable);
    auto pred = classify(strauss(3, Rat(242, 100)));
    REQUIRE(pred.verdict == Verdict::ExpectedStable);
    REQUIRE(pred.sigma[0] == 0);
    REQUIRE(*pred.s[0] == Rat(42, 100));  // s = q - 2 on the stable side
    auto p3 = classify(strauss(3, Rat(3)));
    REQUIRE(*p3.s[0] == 1);
}

TEST_CASE("derivative power problem across the critical value") {
    REQUIRE(classify(glassey(3, Rat(199, 100))).verdict == Verdict::ExpectedUnstable);
    REQUIRE(classify(glassey(3, Rat(2))).verdict == Verdict::Borderline);
    REQUIRE(classify(glassey(3, Rat(201, 100))).verdict == Verdict::ExpectedStable);
    // the borderline case carries the scri logarithm marker
    REQUIRE(classify(glassey(3, Rat(2))).log_flags[0].scri_log);
}

TEST_CASE("outgoing-derivative problem, odd and even dimension") {
    REQUIRE(classify(dv_problem(3, Rat(136, 100))).verdict == Verdict::ExpectedUnstable);
    REQUIRE(classify(dv_problem(3, Rat(137, 100))).verdict == Verdict::ExpectedStable);
    REQUIRE(classify(dv_problem(2, Rat(149, 100))).verdict == Verdict::ExpectedUnstable);
    REQUIRE(classify(dv_problem(2, Rat(3, 2))).verdict == Verdict::Borderline);
    REQUIRE(classify(dv_problem(2, Rat(151, 100))).verdict == Verdict::ExpectedStable);
    // without the even-dimension cap the flip would sit near 1.46
    REQUIRE(classify(dv_problem(3, Rat(147, 100))).verdict == Verdict::ExpectedStable);
}

TEST_CASE("two-field power system") {
    auto pred = classify(two_strauss(3, Rat(3), Rat(3)));
    REQUIRE(pred.verdict == Verdict::ExpectedStable);
    REQUIRE(*pred.s[0] == 1);
    REQUIRE(*pred.s[1] == 1);
    REQUIRE(classify(two_strauss(3, Rat(11, 5), Rat(11, 5))).verdict ==
            Verdict::ExpectedUnstable);
}

TEST_CASE("coupled mixed-power system, both branches") {
    auto stable = classify(sg_system(3, Rat(9, 5), Rat(3)));
    REQUIRE(stable.verdict == Verdict::ExpectedStable);
    REQUIRE(stable.sigma[0] == Rat(1, 5));  // field grows at scri yet the tails close
    REQUIRE(stable.sigma[1] == 0);
    REQUIRE(*stable.s[1] == Rat(2, 5));
    REQUIRE(*stable.s[0] == Rat(-12, 25));
    REQUIRE(classify(sg_system(3, Rat(3, 2), Rat(5, 2))).verdict == Verdict::ExpectedUnstable);
    // rational point exactly on the known branch of the curve
    REQUIRE(classify(sg_system(3, Rat(5, 2), Rat(2))).verdict == Verdict::Borderline);
    REQUIRE(classify(sg_system(3, Rat(13, 5), Rat(2))).verdict == Verdict::ExpectedStable);
}

TEST_CASE("initial data tails") {
    auto border = classify(strauss_with_tail(Rat(3), Rat(1)));
    REQUIRE(border.verdict == Verdict::Borderline);
    REQUIRE(*border.s[0] == 0);
    auto stable = classify(strauss_with_tail(Rat(3), Rat(11, 10)));
    REQUIRE(stable.verdict == Verdict::ExpectedStable);
    REQUIRE(*stable.s[0] == Rat(1, 10));
    REQUIRE(classify(strauss_with_tail(Rat(3), Rat(9, 10))).verdict ==
            Verdict::ExpectedUnstable);
    // u-decay of the interior forcing exactly 1 marks the corner logarithm
    auto corner = classify(strauss_with_tail(Rat(3), Rat(4, 3)));
    REQUIRE(corner.verdict == Verdict::ExpectedStable);
    REQUIRE(corner.log_flags[0].corner_log);
}

TEST_CASE("compact no-term fields keep an infinite-decay sentinel") {
    // field 1 radiates into field 0 but has no tail of its own in odd dimension
    DataSpec d0, d1;
    d0.declared = d1.declared = true;
    auto ws = make_system(3, {NonlinearTerm{0, 1, DerivKind::None, Rat(3)}}, 2, {d0, d1});
    auto pred = classify(ws);
    REQUIRE(pred.verdict == Verdict::ExpectedStable);
    REQUIRE_FALSE(pred.s[1].has_value());
    REQUIRE(pred.s[0].has_value());
    REQUIRE(*pred.s[0] == 1);  // only the scri candidate survives
}

TEST_CASE("sweeps flip exactly where the catalog predicts") {
    using catalog::Side;
    const Rat step(1, 100);
    SECTION("scalar mixed powers at fixed q1") {
        const Rat q1(5, 2);
        for (Rat q2(22, 10); q2 <= Rat(26, 10); q2 += step) {
            auto v = classify(sg_scalar(3, q1, q2)).verdict;
            auto side = catalog::strauss_glassey_scalar_curve(Quad{q1}, Quad{q2}, 3);
            if (side == Side::StableSide) REQUIRE(v == Verdict::ExpectedStable);
            if (side == Side::UnstableSide) REQUIRE(v == Verdict::ExpectedUnstable);
        }
    }
    SECTION("null-augmented system at fixed q2") {
        const Rat q2(3);
        for (Rat q1(28, 10); q1 <= Rat(32, 10); q1 += step) {
            auto v = classify(strauss_null(3, q1, q2)).verdict;
            auto side = catalog::strauss_null_curve(Quad{q1}, Quad{q2}, 3);
            if (side == Side::StableSide) REQUIRE(v == Verdict::ExpectedStable);
            if (side == Side::UnstableSide) REQUIRE(v == Verdict::ExpectedUnstable);
            if (side == Side::Critical) REQUIRE(v == Verdict::Borderline);
        }
    }
    SECTION("weighted derivative problem") {
        const Rat al(1, 2), be(1, 4);
        for (Rat q(2); q <= Rat(5, 2); q += step) {
            auto ws = make_system(3, {NonlinearTerm{0, 0, DerivKind::Dt, q, Rat(1), al, be}}, 1);
            auto v = classify(ws).verdict;
            auto side = catalog::kitamura_condition(Quad{q}, al, be, 3);
            if (side == Side::StableSide) REQUIRE(v == Verdict::ExpectedStable);
            if (side == Side::UnstableSide) REQUIRE(v == Verdict::ExpectedUnstable);
        }
    }
}

TEST_CASE("classification is invariant under field permutation") {
    std::mt19937 rng(11);
    std::uniform_int_distribution<int> qn(21, 40);
    for (int round = 0; round < 60; ++round) {
        const int nf = 3;
        std::vector<NonlinearTerm> terms;
        std::uniform_int_distribution<int> fi(0, nf - 1);
        for (int t = 0; t < 4; ++t)
            terms.push_back(NonlinearTerm{fi(rng), fi(rng), static_cast<DerivKind>(rng() % 3),
                                          Rat(qn(rng), 10)});
        auto ws = make_system(3, terms, nf);
        std::vector<int> perm{0, 1, 2};
        std::shuffle(perm.begin(), perm.end(), rng);
        WaveSystem ws2 = ws;
        for (auto& t : ws2.terms) {
            t.equation = perm[t.equation];
            t.source = perm[t.source];
        }
        auto a = classify(ws), b = classify(ws2);
        REQUIRE(a.verdict == b.verdict);
        if (a.sigma_bounded && b.sigma_bounded)
            for (int i = 0; i < nf; ++i) {
                REQUIRE(a.sigma[i] == b.sigma[perm[i]]);
                if (a.s_solvable) REQUIRE(a.s[i] == b.s[perm[i]]);
            }
    }
}

TEST_CASE("fields without terms or data are rejected") {
    WaveSystem ws;
    ws.n = 3;
    ws.fields = {"phi"};
    ws.data.resize(1);  // not declared
    REQUIRE_THROWS_AS(classify(ws), std::invalid_argument);
}
