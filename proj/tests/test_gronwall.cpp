#include <catch2/catch_amalgamated.hpp>

#include "wavecrit/gronwall.hpp"
#include "wavecrit/simulator.hpp"

#include <cmath>

using namespace wavecrit;

namespace {

GronwallSystem scalar_system(double c, double alpha, double p, double x0) {
    GronwallSystem g;
    g.n = 1;
    g.c = {c};
    g.alpha = {alpha};
    g.p = {p};
    g.x0 = {x0};
    return g;
}

// the three-component comparison system of the mixed-power blow-up proof,
// with eps-regularized powers and unit constants
GronwallSystem mixed_power_comparison(double q1, double q2, double eps) {
    const double s2 = q2 - 2.0 + q2 * (q1 - 2.0);
    GronwallSystem g;
    g.n = 3;
    g.c = {1.0, 1.0, 1.0};
    g.p = {1.0 + eps, 1.0, 1.0 + eps};
    g.alpha = {3.0 * (q1 - 1.0) - (q1 - 1.0 - eps) * (2.0 - s2), 0.0,
               3.0 * (q2 - 1.0) - (q2 - 1.0 - eps) * (4.0 - s2 * q1 - q1)};
    g.x0 = {1.0, 1.0, 1.0};
    return g;
}

}  // namespace

TEST_CASE("hypothesis predicate") {
    GronwallSystem g;
    g.n = 2;
    g.c = {1, 1};
    g.p = {2, 2};
    g.alpha = {1, 1};
    g.x0 = {1, 1};
    REQUIRE(check_hypotheses(g));
    g.p = {1, 1};
    REQUIRE_FALSE(check_hypotheses(g));  // product of powers must exceed 1
    g.p = {2, 2};
    g.alpha = {2, 1.5};
    REQUIRE_FALSE(check_hypotheses(g));  // alpha sum above the component count
    g.alpha = {1, 1};
    g.x0 = {1, -1};
    REQUIRE_FALSE(check_hypotheses(g));
}

TEST_CASE("scalar blow-up against the closed form") {
    // x' = t^-1 x^2, x(1) = a has x = a / (1 - a log t), blow-up at e^{1/a}
    for (double a : {1.0, 1.5, 2.0}) {
        auto res = integrate(scalar_system(1.0, 1.0, 2.0, a));
        REQUIRE(res.blowup_time.has_value());
        REQUIRE(res.refined_ok);
        const double exact = std::exp(1.0 / a);
        REQUIRE(*res.blowup_time == Catch::Approx(exact).epsilon(0.01));
        REQUIRE(*res.blowup_time <= std::exp(1.0) * 1.01);  // comparison monotonicity
    }
}

TEST_CASE("linear power runs to the horizon") {
    // x' = t^-1 x, x(1) = 1 is x = t: global, no certificate
    auto res = integrate(scalar_system(1.0, 1.0, 1.0, 1.0), 1e8);
    REQUIRE_FALSE(res.blowup_time.has_value());
    REQUIRE_FALSE(res.overflowed);
    REQUIRE(res.trajectory.back().second ==
            Catch::Approx(res.trajectory.back().first).epsilon(1e-3));
}

TEST_CASE("blow-up time decreases in the constants and the data") {
    double prev = 1e300;
    for (double c : {0.5, 1.0, 2.0, 4.0}) {
        auto res = integrate(scalar_system(c, 1.0, 2.0, 1.0));
        REQUIRE(res.blowup_time.has_value());
        REQUIRE(*res.blowup_time < prev);
        prev = *res.blowup_time;
    }
    prev = 1e300;
    for (double a : {0.5, 1.0, 2.0, 4.0}) {
        auto res = integrate(scalar_system(1.0, 1.0, 2.0, a));
        REQUIRE(res.blowup_time.has_value());
        REQUIRE(*res.blowup_time < prev);
        prev = *res.blowup_time;
    }
}

TEST_CASE("three-component mixed-power comparison system blows up") {
    auto g = mixed_power_comparison(1.5, 2.5, 0.1);
    REQUIRE(check_hypotheses(g));
    auto res = integrate(g);
    REQUIRE(res.blowup_time.has_value());
    REQUIRE(res.refined_ok);
    REQUIRE(*res.blowup_time > 1.0);
}

TEST_CASE("second-order form and interleaved form agree") {
    // H'' = c t^-alpha H^p integrated directly (test-side RK4) against the
    // library's interleaved first-order system
    const double c = 1.0, alpha = 1.0, p = 2.0;
    auto direct_blowup = [&](double H0, double Hdot0) {
        double t = 1.0, H = H0, V = Hdot0, h = 1e-4;
        auto acc = [&](double tt, double HH) { return c * std::pow(tt, -alpha) * std::pow(HH, p); };
        while (t < 1e6) {
            if (H > 1e13) return t;
            const double k1v = acc(t, H), k1h = V;
            const double k2v = acc(t + h / 2, H + h / 2 * k1h), k2h = V + h / 2 * k1v;
            const double k3v = acc(t + h / 2, H + h / 2 * k2h), k3h = V + h / 2 * k2v;
            const double k4v = acc(t + h, H + h * k3h), k4h = V + h * k3v;
            H += h / 6 * (k1h + 2 * k2h + 2 * k3h + k4h);
            V += h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
            t += h;
            h = std::min(0.05 * (1.0 + t) / (1.0 + std::abs(V / std::max(H, 1e-12))), 1e-2 * t);
        }
        return -1.0;
    };
    GronwallSystem g;
    g.n = 2;
    g.c = {c, 1.0};
    g.alpha = {alpha, 0.0};
    g.p = {p, 1.0};
    g.x0 = {0.7, 1.3};  // (H', H)
    auto res = integrate(g);
    const double t_direct = direct_blowup(1.3, 0.7);
    REQUIRE(res.blowup_time.has_value());
    REQUIRE(t_direct > 0);
    REQUIRE(*res.blowup_time == Catch::Approx(t_direct).epsilon(0.05));
}

TEST_CASE("moment coupling from a simulated subcritical run") {
    WaveSystem ws;
    ws.n = 3;
    ws.fields = {"phi"};
    ws.terms = {NonlinearTerm{0, 0, DerivKind::None, Rat(2)}};
    ws.data.resize(1);
    ws.data[0].declared = true;
    ws.data[0].amplitude = Rat(1, 2);
    Grid g;
    g.h = 1.0 / 64;
    g.u_max = 40;
    g.v_max = 80;
    Probe p;
    p.kind = Probe::Kind::Moment;
    p.start = 1.0;
    p.per_decade = 48;
    auto evo = evolve(ws, g, {p}, {});
    REQUIRE(evo.blowup.has_value());

    // drop the last few samples (already deep in the blow-up transient)
    Series H = evo.probes[0].moment_3d, M = evo.probes[0].source_moment_3d;
    H.resize(H.size() * 3 / 4);
    M.resize(M.size() * 3 / 4);
    auto coupling = couple_from_moments({H}, {M});
    INFO(coupling.reason);
    REQUIRE(coupling.applicable);
    auto res = integrate(coupling.sys, 1e8);
    REQUIRE(res.blowup_time.has_value());
}

TEST_CASE("moment coupling is not applicable for stable or empty runs") {
    SECTION("zero fields") {
        Series H, M;
        for (double t = 2; t < 100; t *= 1.2) {
            H.emplace_back(t, 0.0);
            M.emplace_back(t, 0.0);
        }
        auto coupling = couple_from_moments({H}, {M});
        REQUIRE_FALSE(coupling.applicable);
    }
    SECTION("stable cubic run") {
        WaveSystem ws;
        ws.n = 3;
        ws.fields = {"phi"};
        ws.terms = {NonlinearTerm{0, 0, DerivKind::None, Rat(3)}};
        ws.data.resize(1);
        ws.data[0].declared = true;
        ws.data[0].amplitude = Rat(1, 100);
        Grid g;
        g.h = 1.0 / 32;
        g.u_max = 30;
        g.v_max = 512;
        g.t_max = 200;
        Probe p;
        p.kind = Probe::Kind::Moment;
        p.start = 1.0;
        p.per_decade = 48;
        auto evo = evolve(ws, g, {p}, {});
        REQUIRE_FALSE(evo.blowup.has_value());
        auto coupling =
            couple_from_moments({evo.probes[0].moment_3d}, {evo.probes[0].source_moment_3d});
        INFO(coupling.reason);
        // the fitted system sits at the hypothesis boundary: it must either be
        // inapplicable or decline to certify blow-up within the horizon
        if (coupling.applicable) {
            auto res = integrate(coupling.sys, 1e8);
            REQUIRE_FALSE(res.blowup_time.has_value());
        }
    }
}
