#pragma once

// Double-null characteristic evolution of spherically symmetric semilinear
// systems in three space dimensions.  With psi_i = r phi_i the equations
// reduce to d_u d_v psi_i = S_i on the (u, v) lattice, and the rectangle rule
//
//     psi_NE = psi_NW + psi_SE - psi_SW + h^2 S(center)
//
// is exact for the homogeneous equation.  Sources are evaluated at cell
// centers with a predictor pass (three known corners) and one corrector pass
// (all four corners, centered difference stencils), keeping second order.
// Marching is by diagonals t = u + v = const; only three diagonals are live.

#include "fitting.hpp"
#include "wave_system.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace wavecrit {

struct Grid {
    double h = 1.0 / 128;
    double u_max = 64.0;
    double v_max = 16384.0;
    double t_max = 0.0;    // 0 = unlimited (u_max + v_max)
    double u_strip = 0.0;  // keep u <= u_strip marching to v_max past t_max

    Grid refined(int factor) const {
        Grid g = *this;
        g.h /= factor;
        return g;
    }

    void validate() const {
        if (h <= 0) throw std::invalid_argument("grid: h > 0 required");
        if (v_max <= u_max) throw std::invalid_argument("grid: v_max > u_max required");
        if (u_max <= 0) throw std::invalid_argument("grid: u_max > 0 required");
    }
};

struct Probe {
    enum class Kind { FixedR, FixedRho, Scri, Moment };
    enum class Quantity { Psi, Phi, DtPhi, DvPhi, DuPhi };

    Kind kind = Kind::FixedRho;
    Quantity quantity = Quantity::Psi;
    int field = 0;
    double parameter = 0.5;   // r0, rho, or u0 depending on kind
    double start = 2.0;       // first sample (t, or v for scri probes)
    double per_decade = 24.0;

    Series series;            // (t, value); (v, value) for scri probes
    Series moment_3d;         // moment probes: 4 pi int r psi dr
    Series source_moment_3d;  // moment probes: 4 pi int r^2 S_phi dr
};

struct BlowupInfo {
    enum class Trigger { Threshold, NonFinite };
    Trigger trigger = Trigger::Threshold;
    double t = 0, u = 0, v = 0;
    int field = 0;
};

struct BlowupCertificate {
    BlowupInfo::Trigger trigger = BlowupInfo::Trigger::Threshold;
    double u = 0, v = 0;
    double t_coarse = 0, t_medium = 0, t_fine = 0;  // blow-up time at h, h/2, h/4
    double convergence_ratio = 0;                   // (t_c - t_m) / (t_m - t_f)
};

struct Evolution {
    std::vector<Probe> probes;
    std::optional<BlowupInfo> blowup;
    bool instability = false;   // homogeneous linear-mode monitor tripped
    double reached_t = 0;
    double initial_amplitude = 0;
};

struct EvolveOptions {
    double threshold_factor = 1e6;  // blow-up trigger at factor * initial amplitude
    double threshold_absolute = 0;  // overrides the relative trigger when > 0
    // external psi-equation sources per field (oracle comparisons); the value
    // is S(u, v) with d_u d_v psi = S
    std::vector<std::function<double(double, double)>> external_source;
    // optional data profile overrides: phi0(r), phi1(r) per field
    std::vector<std::function<double(double)>> phi0_override, phi1_override;
    // monitor |dv phi| of one field and record the first point where it
    // reaches 1 (weak-null obstruction tracking); negative = off
    int dv_monitor_field = -1;
    std::function<void(const struct DiagonalView&)> diagonal_hook;
    std::string snapshot_path;  // when set, dump every snapshot_stride-th diagonal
    int snapshot_stride = 256;
};

// read-only view of the freshly computed diagonal, for tests and dumps;
// node i carries u = u_lo + i h, v = u_lo + (d - i) h
struct DiagonalView {
    long d = 0;
    double t = 0;
    long lo = 0, hi = 0;
    double u_lo = 0, h = 0;
    const std::vector<std::vector<double>>* psi = nullptr;  // per field, indexed by i
};

struct ObstructionPoint {
    double t = 0, u = 0, v = 0;
};

namespace detail {

inline double bump01(double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    return std::exp(-1.0 / (x * (1.0 - x)));
}

inline double bump01_prime(double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    const double g = x * (1.0 - x);
    return bump01(x) * (1.0 - 2.0 * x) / (g * g);
}

// Default data family: an annular C-infinity bump supported in
// r/R in [1/4, 1], normalized so that max_r (r phi0) = amplitude * R, with
// outgoing velocity psi1 = -psi0'.  The linear evolution then carries
// r phi ~ amplitude on an outgoing strip -- the "sufficiently positive" seed.
struct DataProfile {
    double amp = 0.0, R = 1.0;

    static double norm() {
        static const double k = [] {
            double best = 0.0;
            for (int i = 1; i < 4096; ++i) {
                const double x = i / 4096.0;
                best = std::max(best, (0.25 + 0.75 * x) * bump01(x));
            }
            return 1.0 / best;
        }();
        return k;
    }

    double phi0(double r) const {
        const double x = (r / R - 0.25) / 0.75;
        return amp * norm() * bump01(x) / R;
    }
    double dphi0(double r) const {
        const double x = (r / R - 0.25) / 0.75;
        return amp * norm() * bump01_prime(x) / (0.75 * R * R);
    }
    // phi1 = psi1 / r with psi1 = -(r phi0)' ; regular since the annulus
    // vanishes near the axis
    double phi1(double r) const {
        if (r <= 0.25 * R) return 0.0;
        return -(phi0(r) / r + dphi0(r));
    }
};

struct PreparedTerm {
    int equation, source;
    DerivKind kind;
    double q, coeff, alpha, beta;
    int q_int;  // q when integral and small, else 0
};

inline double power_abs(double x, double q, int q_int) {
    const double a = std::abs(x);
    switch (q_int) {
        case 2: return a * a;
        case 3: return a * a * a;
        case 4: return a * a * a * a;
        default: return std::pow(a, q);
    }
}

}  // namespace detail

class Simulator {
  public:
    Simulator(const WaveSystem& sys, Grid grid, EvolveOptions opts = {})
        : sys_(sys), grid_(grid), opts_(std::move(opts)) {
        sys_.validate();
        grid_.validate();
        if (sys_.n != 3)
            throw std::invalid_argument("simulator: only three space dimensions are supported");
        if (sys_.field_count() > 8) throw std::invalid_argument("simulator: at most 8 fields");
        for (const auto& t : sys_.terms) {
            if (t.coefficient == 0) continue;
            detail::PreparedTerm p{t.equation,
                                   t.source,
                                   t.derivative,
                                   to_double(t.power),
                                   to_double(t.coefficient),
                                   to_double(t.t_weight),
                                   to_double(t.u_weight),
                                   0};
            const double qr = std::round(p.q);
            if (p.q == qr && qr >= 2 && qr <= 4) p.q_int = static_cast<int>(qr);
            terms_.push_back(p);
        }
    }

    Evolution run(std::vector<Probe> probes) {
        const int nf = sys_.field_count();
        const double h = grid_.h;

        double data_radius = 0.0;
        for (const auto& d : sys_.data) data_radius = std::max(data_radius, to_double(d.radius));
        const long i_data = static_cast<long>(std::ceil(data_radius / (2.0 * h))) + 1;
        const double u_lo = -static_cast<double>(i_data) * h;

        const long Imax = static_cast<long>(std::llround((grid_.u_max - u_lo) / h));
        const long Jmax = static_cast<long>(std::llround((grid_.v_max - u_lo) / h));
        const double t_cap = grid_.t_max > 0 ? grid_.t_max : grid_.u_max + grid_.v_max;
        const long Dcap = static_cast<long>(std::floor((t_cap - 2.0 * u_lo) / h));
        const long Istrip = grid_.u_strip > 0
                                ? static_cast<long>(std::llround((grid_.u_strip - u_lo) / h))
                                : -1;
        const long d0 = 2 * i_data;  // diagonal t = 0

        auto u_of = [&](long i) { return u_lo + i * h; };
        auto v_of = [&](long j) { return u_lo + j * h; };

        std::vector<std::vector<double>> prev2(nf), prev1(nf), cur(nf);
        for (int f = 0; f < nf; ++f) {
            prev2[f].assign(Imax + 1, 0.0);
            prev1[f].assign(Imax + 1, 0.0);
            cur[f].assign(Imax + 1, 0.0);
        }

        std::vector<detail::DataProfile> profiles(nf);
        for (int f = 0; f < nf; ++f)
            profiles[f] = detail::DataProfile{to_double(sys_.data[f].amplitude),
                                              to_double(sys_.data[f].radius)};
        auto phi0 = [&](int f, double r) -> double {
            if (static_cast<size_t>(f) < opts_.phi0_override.size() && opts_.phi0_override[f])
                return opts_.phi0_override[f](r);
            return profiles[f].phi0(r);
        };
        auto phi1 = [&](int f, double r) -> double {
            if (static_cast<size_t>(f) < opts_.phi1_override.size() && opts_.phi1_override[f])
                return opts_.phi1_override[f](r);
            return profiles[f].phi1(r);
        };
        auto psi0 = [&](int f, double r) { return std::abs(r) * phi0(f, std::abs(r)) * (r < 0 ? -1.0 : 1.0); };

        Evolution evo;
        evo.probes = std::move(probes);

        std::vector<double> next_sample(evo.probes.size());
        for (size_t p = 0; p < evo.probes.size(); ++p) next_sample[p] = evo.probes[p].start;

        // --- seed the two initial diagonals --------------------------------
        auto range_of = [&](long d) -> std::pair<long, long> {
            long lo = std::max<long>(0, d - Jmax);
            long hi = std::min<long>(Imax, d / 2);
            if (d > Dcap) hi = std::min(hi, Istrip);
            return {lo, hi};
        };

        {
            auto [lo, hi] = range_of(d0);
            for (long i = lo; i <= hi; ++i) {
                const double r = (d0 - 2 * i) * h;
                for (int f = 0; f < nf; ++f) prev2[f][i] = psi0(f, r);
            }
            auto [lo1, hi1] = range_of(d0 + 1);
            for (long i = lo1; i <= hi1; ++i) {
                const double r = (d0 + 1 - 2 * i) * h;
                for (int f = 0; f < nf; ++f) {
                    const double ddr =
                        (psi0(f, r + h) - 2.0 * psi0(f, r) + psi0(f, r - h)) / (h * h);
                    double src = source_at_data(f, r, phi0, phi1);
                    prev1[f][i] =
                        psi0(f, r) + h * r * phi1(f, r) + 0.5 * h * h * (ddr + src);
                }
            }
        }

        double amp = 0.0;
        for (int f = 0; f < nf; ++f)
            for (long i = 0; i <= Imax; ++i)
                amp = std::max(amp, std::max(std::abs(prev2[f][i]), std::abs(prev1[f][i])));
        evo.initial_amplitude = amp;
        // externally forced runs from zero data have no amplitude reference;
        // only the absolute trigger (or non-finite values) stops those
        double threshold = std::numeric_limits<double>::infinity();
        if (opts_.threshold_absolute > 0)
            threshold = opts_.threshold_absolute;
        else if (amp > 0)
            threshold = opts_.threshold_factor * amp;
        const bool homogeneous = terms_.empty() && opts_.external_source.empty();

        std::ofstream snap;
        if (!opts_.snapshot_path.empty()) {
            snap.open(opts_.snapshot_path, std::ios::binary);
            const char magic[4] = {'W', 'C', 'R', 'T'};
            const uint32_t version = 1, fields = static_cast<uint32_t>(nf);
            snap.write(magic, 4);
            snap.write(reinterpret_cast<const char*>(&version), 4);
            snap.write(reinterpret_cast<const char*>(&fields), 4);
            snap.write(reinterpret_cast<const char*>(&h), 8);
        }

        // --- march ----------------------------------------------------------
        const double r_min = 0.5 * h;
        for (long d = d0 + 2;; ++d) {
            auto [lo, hi] = range_of(d);
            if (lo > hi) break;
            const double t = 2.0 * u_lo + d * h;

            for (int f = 0; f < nf; ++f) std::fill(cur[f].begin(), cur[f].end(), 0.0);

            for (long i = lo; i <= hi; ++i) {
                const long j = d - i;
                if (i == j) continue;  // axis: psi = 0
                if (i == 0) continue;  // left edge sits outside every domain of influence
                const double r_c = (j - i) * h;
                const double u_c = u_of(i) - 0.5 * h, v_c = v_of(j) - 0.5 * h;
                const double guard = std::max(r_c, r_min);

                // predictor: three known corners
                double s_pred[8] = {0};
                if (!terms_.empty() || !opts_.external_source.empty()) {
                    for (int f = 0; f < nf; ++f) {
                        scratch_psi_[f] = 0.5 * (prev1[f][i] + prev1[f][i - 1]);
                        scratch_dv_[f] = (prev1[f][i - 1] - prev2[f][i - 1]) / h;
                        scratch_du_[f] = (prev1[f][i] - prev2[f][i - 1]) / h;
                    }
                    evaluate_sources(s_pred, t - h, u_c, v_c, guard);
                }
                for (int f = 0; f < nf; ++f) {
                    const double lin = prev1[f][i] + prev1[f][i - 1] - prev2[f][i - 1];
                    cur[f][i] = lin + h * h * (s_pred[f] + external(f, u_c, v_c));
                }
                // corrector: centered stencils through the provisional corner
                if (!terms_.empty()) {
                    double s_corr[8] = {0};
                    for (int f = 0; f < nf; ++f) {
                        scratch_psi_[f] = 0.25 * (prev1[f][i] + prev1[f][i - 1] +
                                                  prev2[f][i - 1] + cur[f][i]);
                        scratch_dv_[f] = 0.5 *
                                         ((prev1[f][i - 1] - prev2[f][i - 1]) +
                                          (cur[f][i] - prev1[f][i])) /
                                         h;
                        scratch_du_[f] = 0.5 *
                                         ((prev1[f][i] - prev2[f][i - 1]) +
                                          (cur[f][i] - prev1[f][i - 1])) /
                                         h;
                    }
                    evaluate_sources(s_corr, t - h, u_c, v_c, guard);
                    for (int f = 0; f < nf; ++f) {
                        const double lin = prev1[f][i] + prev1[f][i - 1] - prev2[f][i - 1];
                        cur[f][i] = lin + h * h * (s_corr[f] + external(f, u_c, v_c));
                    }
                }
            }

            evo.reached_t = t;

            // blow-up / instability monitor
            double dmax = 0.0;
            int dmax_f = 0;
            long dmax_i = lo;
            bool finite = true;
            for (int f = 0; f < nf && finite; ++f)
                for (long i = lo; i <= hi; ++i) {
                    const double a = std::abs(cur[f][i]);
                    if (!std::isfinite(a)) {
                        finite = false;
                        dmax_f = f;
                        dmax_i = i;
                        break;
                    }
                    if (a > dmax) { dmax = a; dmax_f = f; dmax_i = i; }
                }
            if (!finite || dmax > threshold) {
                BlowupInfo b;
                b.trigger = finite ? BlowupInfo::Trigger::Threshold : BlowupInfo::Trigger::NonFinite;
                b.t = t;
                b.u = u_of(dmax_i);
                b.v = v_of(d - dmax_i);
                b.field = dmax_f;
                evo.blowup = b;
                break;
            }
            if (homogeneous && dmax > 1e3 * std::max(amp, 1e-300)) {
                evo.instability = true;
                break;
            }

            // weak-null obstruction monitor
            if (opts_.dv_monitor_field >= 0 && !obstruction_) {
                const int f = opts_.dv_monitor_field;
                for (long i = lo; i <= hi; ++i) {
                    const long j = d - i;
                    if (j - i < 2) continue;
                    const double r = (j - i) * h;
                    const double dvpsi =
                        (3.0 * cur[f][i] - 4.0 * prev1[f][i] + prev2[f][i]) / (2.0 * h);
                    const double dvphi = (dvpsi - cur[f][i] / r) / r;
                    if (std::abs(dvphi) >= 1.0) {
                        obstruction_ = ObstructionPoint{t, u_of(i), v_of(j)};
                        break;
                    }
                }
            }

            sample_probes(evo, next_sample, d, t, lo, hi, u_lo, h, Jmax, Dcap, prev2, prev1, cur);

            if (opts_.diagonal_hook) {
                DiagonalView view{d, t, lo, hi, u_lo, h, &cur};
                opts_.diagonal_hook(view);
            }
            if (snap.is_open() && (d - d0) % opts_.snapshot_stride == 0)
                for (int f = 0; f < nf; ++f)
                    snap.write(reinterpret_cast<const char*>(cur[f].data()),
                               static_cast<std::streamsize>(sizeof(double) * (Imax + 1)));

            std::swap(prev2, prev1);
            std::swap(prev1, cur);
        }
        return evo;
    }

    std::optional<ObstructionPoint> obstruction() const { return obstruction_; }

  private:
    double external(int f, double u, double v) const {
        if (static_cast<size_t>(f) < opts_.external_source.size() && opts_.external_source[f])
            return opts_.external_source[f](u, v);
        return 0.0;
    }

    // sources from the scratch field values (psi, dv psi, du psi per field)
    void evaluate_sources(double* out, double t, double u, double v, double r_guarded) {
        (void)v;
        for (const auto& tm : terms_) {
            const double psi_j = scratch_psi_[tm.source];
            double x;
            switch (tm.kind) {
                case DerivKind::None: x = psi_j; break;
                case DerivKind::Dt:
                    x = 0.5 * (scratch_du_[tm.source] + scratch_dv_[tm.source]);
                    break;
                case DerivKind::Dv: x = scratch_dv_[tm.source] - psi_j / r_guarded; break;
                case DerivKind::Du: x = scratch_du_[tm.source] + psi_j / r_guarded; break;
                default: x = psi_j;
            }
            double w = 1.0;
            if (tm.alpha != 0.0) w *= std::pow(1.0 + t * t, 0.5 * tm.alpha);
            if (tm.beta != 0.0) w *= std::pow(1.0 + u * u, 0.5 * tm.beta);
            out[tm.equation] += tm.coeff * w * std::pow(r_guarded, 1.0 - tm.q) *
                                detail::power_abs(x, tm.q, tm.q_int);
        }
    }

    // source of the psi equation at t = 0 from the data profiles
    template <class Phi0, class Phi1>
    double source_at_data(int f, double r, const Phi0& phi0, const Phi1& phi1) {
        double s = 0.0;
        const double rr = std::max(std::abs(r), 0.5 * grid_.h);
        for (const auto& tm : terms_) {
            if (tm.equation != f) continue;
            double x;
            const double h = grid_.h;
            switch (tm.kind) {
                case DerivKind::None: x = std::abs(r) * phi0(tm.source, std::abs(r)); break;
                case DerivKind::Dt: x = std::abs(r) * phi1(tm.source, std::abs(r)); break;
                default: {  // du/dv from the radial derivative of r phi0
                    const double dr = (std::abs(r + h) * phi0(tm.source, std::abs(r + h)) -
                                       std::abs(r - h) * phi0(tm.source, std::abs(r - h))) /
                                      (2.0 * h);
                    const double dt = std::abs(r) * phi1(tm.source, std::abs(r));
                    x = tm.kind == DerivKind::Dv ? (dt + dr) - phi0(tm.source, std::abs(r))
                                                 : (dt - dr) + phi0(tm.source, std::abs(r));
                }
            }
            double w = 1.0;
            if (tm.beta != 0.0) w *= std::pow(1.0 + 0.25 * r * r, 0.5 * tm.beta);
            s += tm.coeff * w * std::pow(rr, 1.0 - tm.q) * detail::power_abs(x, tm.q, tm.q_int);
        }
        return s;
    }

    void sample_probes(Evolution& evo, std::vector<double>& next_sample, long d, double t,
                       long lo, long hi, double u_lo, double h, long Jmax, long Dcap,
                       const std::vector<std::vector<double>>& prev2,
                       const std::vector<std::vector<double>>& prev1,
                       const std::vector<std::vector<double>>& cur) {
        for (size_t p = 0; p < evo.probes.size(); ++p) {
            Probe& pr = evo.probes[p];
            const double step = std::pow(10.0, 1.0 / pr.per_decade);

            auto quantity_at = [&](long i) -> double {
                const long j = d - i;
                const double r = (j - i) * h;
                const double guard = std::max(r, 0.5 * h);
                const double psi = cur[pr.field][i];
                if (pr.quantity == Probe::Quantity::Psi) return psi;
                if (pr.quantity == Probe::Quantity::Phi) return psi / guard;
                double dv, du;
                if (j - i >= 2 && i >= 2) {
                    dv = (3.0 * psi - 4.0 * prev1[pr.field][i] + prev2[pr.field][i]) / (2.0 * h);
                    du = (3.0 * psi - 4.0 * prev1[pr.field][i - 1] + prev2[pr.field][i - 2]) /
                         (2.0 * h);
                } else {  // one-sided fallback near the axis / left edge
                    dv = (psi - prev1[pr.field][i]) / h;
                    du = i >= 1 ? (psi - prev1[pr.field][i - 1]) / h : 0.0;
                }
                switch (pr.quantity) {
                    case Probe::Quantity::DtPhi: return 0.5 * (du + dv) / guard;
                    case Probe::Quantity::DvPhi: return (dv - psi / guard) / guard;
                    case Probe::Quantity::DuPhi: return (du + psi / guard) / guard;
                    default: return psi;
                }
            };

            switch (pr.kind) {
                case Probe::Kind::Scri: {
                    const long i = static_cast<long>(std::llround((pr.parameter - u_lo) / h));
                    if (i < lo || i > hi || i < 2) break;
                    const double v = u_lo + (d - i) * h;
                    if (v < next_sample[p]) break;
                    pr.series.emplace_back(v, quantity_at(i));
                    while (next_sample[p] <= v) next_sample[p] *= step;
                    break;
                }
                case Probe::Kind::Moment: {
                    if (t < next_sample[p]) break;
                    if (d > Jmax || d > Dcap || lo != 0) break;  // need the full slice
                    double h1 = 0, h3 = 0, src = 0;
                    for (long i = hi; i > lo; --i) {
                        // nodes at r and r + 2h; trapezoid in r
                        const long j = d - i;
                        const double r = (j - i) * h;
                        const double pa = cur[pr.field][i], pb = cur[pr.field][i - 1];
                        h1 += (pa + pb) * h;
                        h3 += (r * pa + (r + 2 * h) * pb) * h;
                    }
                    {
                        // source moment 4 pi int r^2 S_phi dr = 4 pi int r S_psi dr
                        for (long i = hi; i > lo; --i) {
                            const long j = d - i;
                            const double r = (j - i) * h + h;  // midpoint
                            for (int f2 = 0; f2 < sys_.field_count(); ++f2) {
                                scratch_psi_[f2] = 0.5 * (cur[f2][i] + cur[f2][i - 1]);
                                scratch_dv_[f2] = (cur[f2][i - 1] - prev1[f2][i - 1]) / h;
                                scratch_du_[f2] = (cur[f2][i] - prev1[f2][i - 1]) / h;
                            }
                            double s_all[8] = {0};
                            evaluate_sources(s_all, t, u_lo + i * h, u_lo + j * h,
                                             std::max(r, 0.5 * h));
                            src += r * s_all[pr.field] * 2.0 * h;
                        }
                    }
                    const double fourpi = 4.0 * M_PI;
                    pr.series.emplace_back(t, h1);
                    pr.moment_3d.emplace_back(t, fourpi * h3);
                    pr.source_moment_3d.emplace_back(t, fourpi * src);
                    while (next_sample[p] <= t) next_sample[p] *= step;
                    break;
                }
                default: {
                    if (t < next_sample[p]) break;
                    const double rt =
                        pr.kind == Probe::Kind::FixedR ? pr.parameter : pr.parameter * t;
                    if (rt <= 0) break;
                    // nodes on this diagonal carry r = (d - 2i) h
                    const double fi = 0.5 * (d - rt / h);
                    const long i0 = static_cast<long>(std::floor(fi));
                    if (i0 < lo || i0 + 1 > hi) break;
                    const double w = fi - i0;  // interpolate toward smaller r
                    const double val = (1.0 - w) * quantity_at(i0) + w * quantity_at(i0 + 1);
                    pr.series.emplace_back(t, val);
                    while (next_sample[p] <= t) next_sample[p] *= step;
                    break;
                }
            }
        }
    }

    WaveSystem sys_;
    Grid grid_;
    EvolveOptions opts_;
    std::vector<detail::PreparedTerm> terms_;
    double scratch_psi_[8] = {0}, scratch_dv_[8] = {0}, scratch_du_[8] = {0};
    std::optional<ObstructionPoint> obstruction_;
};

inline Evolution evolve(const WaveSystem& sys, const Grid& grid, std::vector<Probe> probes,
                        EvolveOptions opts = {}) {
    if (sys.field_count() > 8) throw std::invalid_argument("simulator: at most 8 fields");
    Simulator s(sys, grid, std::move(opts));
    return s.run(std::move(probes));
}

// --- refinement-checked blow-up detection -------------------------------------

inline std::optional<BlowupCertificate> detect_blowup(const WaveSystem& sys, const Grid& grid,
                                                      EvolveOptions opts = {},
                                                      double agreement = 0.10) {
    double times[3] = {0, 0, 0};
    BlowupInfo last{};
    for (int k = 0; k < 3; ++k) {
        auto evo = evolve(sys, grid.refined(1 << k), {}, opts);
        if (!evo.blowup) return std::nullopt;
        times[k] = evo.blowup->t;
        last = *evo.blowup;
    }
    if (std::abs(times[0] - times[1]) > agreement * times[1]) return std::nullopt;
    if (std::abs(times[1] - times[2]) > agreement * times[2]) return std::nullopt;
    BlowupCertificate cert;
    cert.trigger = last.trigger;
    cert.u = last.u;
    cert.v = last.v;
    cert.t_coarse = times[0];
    cert.t_medium = times[1];
    cert.t_fine = times[2];
    const double den = times[1] - times[2];
    cert.convergence_ratio = den != 0 ? (times[0] - times[1]) / den : 0.0;
    return cert;
}

// --- weak-null chain -----------------------------------------------------------

struct WeakNullReport {
    FitResult phi4_interior;    // growth of phi_4 at fixed r/t
    FitResult dvphi4_interior;  // growth of dv phi_4 at r/t = 1/4
    std::optional<ObstructionPoint> obstruction;  // first |dv phi_4| >= 1 in grid
    bool extrapolated = false;  // obstruction time from the fitted growth law
    double obstruction_t = 0;
};

inline WaveSystem weak_null_chain_system(double amplitude) {
    WaveSystem ws;
    ws.n = 3;
    ws.fields = {"phi1", "phi2", "phi3", "phi4"};
    ws.terms = {NonlinearTerm{1, 0, DerivKind::None, Rat(2)},
                NonlinearTerm{2, 1, DerivKind::None, Rat(2)},
                NonlinearTerm{3, 2, DerivKind::None, Rat(2)}};
    ws.data.resize(4);
    for (auto& d : ws.data) {
        d.declared = true;
        d.amplitude = Rat(0);
    }
    auto amp = parse_rational(std::to_string(amplitude));
    ws.data[0].amplitude = amp ? *amp : Rat(1, 100);
    return ws;
}

inline WeakNullReport weak_null_chain(double amplitude, const Grid& grid) {
    auto ws = weak_null_chain_system(amplitude);
    std::vector<Probe> probes;
    Probe p1;
    p1.kind = Probe::Kind::FixedRho;
    p1.quantity = Probe::Quantity::Phi;
    p1.field = 3;
    p1.parameter = 0.25;
    probes.push_back(p1);
    Probe p2 = p1;
    p2.quantity = Probe::Quantity::DvPhi;
    probes.push_back(p2);

    EvolveOptions opts;
    opts.dv_monitor_field = 3;
    Simulator sim(ws, grid, opts);
    auto evo = sim.run(probes);

    WeakNullReport rep;
    FitOptions fo;
    fo.min_decades = 1.5;
    rep.phi4_interior = fit_decay(evo.probes[0].series, fo);
    rep.dvphi4_interior = fit_decay(evo.probes[1].series, fo);
    rep.obstruction = sim.obstruction();
    if (rep.obstruction) {
        rep.obstruction_t = rep.obstruction->t;
    } else {
        // growth is a clean power law; extrapolate |dv phi_4| = 1
        rep.extrapolated = true;
        const auto& f = rep.dvphi4_interior;
        double lo = evo.reached_t, hi = lo;
        auto model = [&](double t) {
            return f.log_c - f.exponent * std::log(t) + f.log_power * std::log(std::log(t));
        };
        while (model(hi) < 0 && hi < 1e300) hi *= 2;
        for (int it = 0; it < 200 && hi / lo > 1.0 + 1e-12; ++it) {
            const double mid = std::sqrt(lo * hi);
            (model(mid) < 0 ? lo : hi) = mid;
        }
        rep.obstruction_t = hi;
    }
    return rep;
}

}  // namespace wavecrit
