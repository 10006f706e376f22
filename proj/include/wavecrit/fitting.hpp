#pragma once

// Log-log least squares for decay/growth rates, with optional log^k t
// correction factors and a dyadic-envelope fallback for sign-changing series.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace wavecrit {

using Series = std::vector<std::pair<double, double>>;  // (t, value), t increasing

struct FitResult {
    double exponent = 0.0;   // value ~ c * t^{-exponent} * log^k t
    int log_power = 0;       // k
    double r2 = 0.0;
    double log_c = 0.0;
    bool envelope_used = false;
    size_t samples_used = 0;
};

struct FitOptions {
    size_t min_samples = 12;
    double min_decades = 2.0;       // span required of the full series
    double transient_decades = 1.0; // dropped from the front before fitting
    int max_log_power = 3;
    bool allow_log = true;
};

namespace detail {

struct LinFit {
    double a = 0.0, b = 0.0, sse = 0.0, sst = 0.0;
};

// least squares y = a + b x
inline LinFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const size_t n = x.size();
    double sx = 0, sy = 0;
    for (size_t i = 0; i < n; ++i) { sx += x[i]; sy += y[i]; }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    LinFit f;
    f.b = sxx > 0 ? sxy / sxx : 0.0;
    f.a = my - f.b * mx;
    for (size_t i = 0; i < n; ++i) {
        const double e = y[i] - (f.a + f.b * x[i]);
        f.sse += e * e;
        f.sst += (y[i] - my) * (y[i] - my);
    }
    return f;
}

inline Series dyadic_envelope(const Series& s) {
    Series env;
    if (s.empty()) return env;
    double hi = 2 * s.front().first, best = 0.0, where = s.front().first;
    bool any = false;
    for (const auto& [t, v] : s) {
        while (t >= hi) {
            if (any) env.emplace_back(where, best);
            hi *= 2;
            best = 0.0;
            any = false;
        }
        if (std::abs(v) >= best) { best = std::abs(v); where = t; }
        any = true;
    }
    if (any) env.emplace_back(where, best);
    return env;
}

}  // namespace detail

inline FitResult fit_decay(const Series& series, const FitOptions& opt = {}) {
    Series s;
    for (const auto& [t, v] : series)
        if (t > 0 && std::isfinite(v)) s.emplace_back(t, v);
    if (s.size() < opt.min_samples)
        throw std::invalid_argument("fit_decay: too few samples");
    const double span = std::log10(s.back().first / s.front().first);
    if (span < opt.min_decades)
        throw std::invalid_argument("fit_decay: series spans less than the required decades");

    const double t_cut = s.front().first * std::pow(10.0, opt.transient_decades);
    Series win;
    for (const auto& p : s)
        if (p.first >= t_cut) win.push_back(p);
    if (win.size() < 4) win = s;

    FitResult out;
    bool signs_mixed = false;
    for (const auto& [t, v] : win)
        if (v == 0.0 || v * win.back().second < 0) { signs_mixed = true; break; }
    if (signs_mixed) {
        win = detail::dyadic_envelope(win);
        out.envelope_used = true;
        Series nz;
        for (const auto& p : win)
            if (p.second != 0.0) nz.push_back(p);
        win = nz;
        if (win.size() < 3) throw std::invalid_argument("fit_decay: envelope too short");
    }
    out.samples_used = win.size();

    std::vector<double> x, y;
    bool loglog_ok = opt.allow_log;
    for (const auto& [t, v] : win) {
        x.push_back(std::log(t));
        y.push_back(std::log(std::abs(v)));
        if (t < 2.0) loglog_ok = false;
    }
    int best_k = 0;
    detail::LinFit best{};
    bool have = false;
    const int kmax = loglog_ok ? opt.max_log_power : 0;
    for (int k = 0; k <= kmax; ++k) {
        std::vector<double> yk(y);
        for (size_t i = 0; i < yk.size(); ++i) yk[i] -= k * std::log(x[i]);  // x = log t > 0
        auto f = detail::linear_fit(x, yk);
        if (!have || f.sse < best.sse) { have = true; best = f; best_k = k; }
    }
    out.exponent = -best.b;
    out.log_power = best_k;
    out.log_c = best.a;
    out.r2 = best.sst > 0 ? 1.0 - best.sse / best.sst : 1.0;
    return out;
}

// degree-1 vs degree-2 polynomial fits in x = log t, for growth-vs-log^2 checks
struct LogPolyFit {
    double c0 = 0, c1 = 0, c2 = 0;
    double sse_deg1 = 0, sse_deg2 = 0;
};

inline LogPolyFit fit_log_poly(const Series& series) {
    std::vector<double> x, y;
    for (const auto& [t, v] : series)
        if (t > 0) { x.push_back(std::log(t)); y.push_back(v); }
    if (x.size() < 4) throw std::invalid_argument("fit_log_poly: too few samples");
    const size_t n = x.size();
    // normal equations for quadratic fit
    double s[5] = {0, 0, 0, 0, 0}, b[3] = {0, 0, 0};
    for (size_t i = 0; i < n; ++i) {
        double xp = 1;
        for (int k = 0; k <= 4; ++k) { s[k] += xp; xp *= x[i]; }
        b[0] += y[i];
        b[1] += y[i] * x[i];
        b[2] += y[i] * x[i] * x[i];
    }
    auto solve3 = [&](double m[3][4]) {
        for (int c = 0; c < 3; ++c) {
            int piv = c;
            for (int r2 = c + 1; r2 < 3; ++r2)
                if (std::abs(m[r2][c]) > std::abs(m[piv][c])) piv = r2;
            std::swap(m[c], m[piv]);
            for (int r2 = 0; r2 < 3; ++r2) {
                if (r2 == c || m[c][c] == 0) continue;
                const double f = m[r2][c] / m[c][c];
                for (int k = c; k < 4; ++k) m[r2][k] -= f * m[c][k];
            }
        }
    };
    double m2[3][4] = {{s[0], s[1], s[2], b[0]}, {s[1], s[2], s[3], b[1]}, {s[2], s[3], s[4], b[2]}};
    solve3(m2);
    LogPolyFit out;
    out.c0 = m2[0][3] / m2[0][0];
    out.c1 = m2[1][3] / m2[1][1];
    out.c2 = m2[2][3] / m2[2][2];
    auto lin = detail::linear_fit(x, y);
    out.sse_deg1 = lin.sse;
    for (size_t i = 0; i < n; ++i) {
        const double e = y[i] - (out.c0 + out.c1 * x[i] + out.c2 * x[i] * x[i]);
        out.sse_deg2 += e * e;
    }
    return out;
}

}  // namespace wavecrit
