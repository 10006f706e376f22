// wavecrit: classify semilinear wave systems by their exponent fixed points
// and verify verdicts with the characteristic simulator and ODE oracles.
//
// exit codes: 0 success, 2 config/usage error, 3 numerical instability,
// 4 inconclusive

#include <CLI11.hpp>
#include <json.hpp>

#include "wavecrit/catalog.hpp"
#include "wavecrit/config.hpp"
#include "wavecrit/decay_rules.hpp"
#include "wavecrit/gronwall.hpp"
#include "wavecrit/kernels1d.hpp"
#include "wavecrit/simulator.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <thread>

using nlohmann::json;
using namespace wavecrit;

namespace {

constexpr int kExitOk = 0, kExitConfig = 2, kExitInstability = 3, kExitInconclusive = 4;

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::filesystem::path out_dir(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("WAVECRIT_OUT")) return env;
    return ".";
}

json rational_json(const Rat& r) {
    return json{{"exact", to_string(r)}, {"approx", to_double(r)}};
}

json prediction_json(const WaveSystem& ws, const DecayPrediction& pred) {
    json j;
    j["verdict"] = to_string(pred.verdict);
    j["sigma_bounded"] = pred.sigma_bounded;
    j["s_solvable"] = pred.s_solvable;
    j["robust"] = pred.sigma_robust && pred.s_robust;
    j["sigma_robust"] = pred.sigma_robust;
    j["s_robust"] = pred.s_robust;
    j["has_loop"] = pred.has_loop;
    j["iterations_used"] = pred.iterations_used;
    json sigma = json::object(), s = json::object(), flags = json::object();
    for (int f = 0; f < ws.field_count(); ++f) {
        if (pred.sigma_bounded) sigma[ws.fields[f]] = rational_json(pred.sigma[f]);
        if (pred.s_solvable)
            s[ws.fields[f]] = pred.s[f] ? rational_json(*pred.s[f]) : json("inf");
        flags[ws.fields[f]] = json{{"scri_log", pred.log_flags[f].scri_log},
                                   {"corner_log", pred.log_flags[f].corner_log}};
    }
    j["sigma"] = sigma;
    j["s"] = s;
    j["log_flags"] = flags;
    json graph = json::array();
    for (const auto& e : pred.graph)
        graph.push_back(json::array({ws.fields[e.from], ws.fields[e.to]}));
    j["graph"] = graph;
    return j;
}

void write_series_csv(const std::filesystem::path& path, const Series& s) {
    std::ofstream out(path);
    out << "t,value\n";
    for (const auto& [t, v] : s) out << fmt(t) << "," << fmt(v) << "\n";
}

struct ParamPath {
    enum class What { TermPower, TermCoefficient, TermTWeight, TermUWeight, DataTail, DataAmplitude } what;
    int index = 0;  // term index or field index
};

ParamPath parse_param_path(const WaveSystem& ws, const std::string& path) {
    auto fail = [&]() -> ParamPath {
        throw std::runtime_error("bad --param '" + path +
                                 "' (term.K.{power,coefficient,t_weight,u_weight} or "
                                 "data.FIELD.{tail_exponent,amplitude})");
    };
    std::vector<std::string> parts;
    std::string cur;
    for (char c : path) {
        if (c == '.') { parts.push_back(cur); cur.clear(); }
        else cur += c;
    }
    parts.push_back(cur);
    if (parts.size() != 3) return fail();
    ParamPath p;
    if (parts[0] == "term") {
        p.index = std::atoi(parts[1].c_str());
        if (p.index < 0 || p.index >= static_cast<int>(ws.terms.size())) return fail();
        if (parts[2] == "power") p.what = ParamPath::What::TermPower;
        else if (parts[2] == "coefficient") p.what = ParamPath::What::TermCoefficient;
        else if (parts[2] == "t_weight") p.what = ParamPath::What::TermTWeight;
        else if (parts[2] == "u_weight") p.what = ParamPath::What::TermUWeight;
        else return fail();
    } else if (parts[0] == "data") {
        p.index = ws.field_index(parts[1]);
        if (p.index < 0) return fail();
        if (parts[2] == "tail_exponent") p.what = ParamPath::What::DataTail;
        else if (parts[2] == "amplitude") p.what = ParamPath::What::DataAmplitude;
        else return fail();
    } else {
        return fail();
    }
    return p;
}

void apply_param(WaveSystem& ws, const ParamPath& p, const Rat& value) {
    switch (p.what) {
        case ParamPath::What::TermPower: ws.terms[p.index].power = value; break;
        case ParamPath::What::TermCoefficient: ws.terms[p.index].coefficient = value; break;
        case ParamPath::What::TermTWeight: ws.terms[p.index].t_weight = value; break;
        case ParamPath::What::TermUWeight: ws.terms[p.index].u_weight = value; break;
        case ParamPath::What::DataTail:
            ws.data[p.index].kind = DataSpec::Kind::Tail;
            ws.data[p.index].tail_exponent = value;
            break;
        case ParamPath::What::DataAmplitude: ws.data[p.index].amplitude = value; break;
    }
}

struct SimFlags {
    double h = 0, vmax = 0, umax = 0, tmax = -1, ustrip = -1, threshold = 0;
    std::string amplitude;
};

Grid grid_from_flags(const SimFlags& f) {
    Grid g;
    g.h = f.h > 0 ? f.h : 1.0 / 128;
    g.v_max = f.vmax > 0 ? f.vmax : 16384;
    g.u_max = f.umax > 0 ? f.umax : 64;
    if (f.tmax >= 0) g.t_max = f.tmax;
    if (f.ustrip >= 0) g.u_strip = f.ustrip;
    return g;
}

void apply_amplitude(WaveSystem& ws, const std::string& amplitude) {
    if (amplitude.empty()) return;
    const Rat a = parse_rational_or_throw(amplitude);
    for (auto& d : ws.data) d.amplitude = a;
}

std::vector<Probe> default_probes(const WaveSystem& ws) {
    std::vector<Probe> probes;
    for (int f = 0; f < ws.field_count(); ++f) {
        Probe rho;
        rho.kind = Probe::Kind::FixedRho;
        rho.parameter = 0.5;
        rho.field = f;
        probes.push_back(rho);
        Probe scri;
        scri.kind = Probe::Kind::Scri;
        scri.parameter = 1.5;
        scri.field = f;
        probes.push_back(scri);
        Probe mom;
        mom.kind = Probe::Kind::Moment;
        mom.field = f;
        mom.start = 1.0;
        probes.push_back(mom);
    }
    return probes;
}

const char* probe_tag(Probe::Kind k) {
    switch (k) {
        case Probe::Kind::FixedR: return "fixed_r";
        case Probe::Kind::FixedRho: return "interior";
        case Probe::Kind::Scri: return "scri";
        case Probe::Kind::Moment: return "moment";
    }
    return "probe";
}

int run_classify(const std::string& config, const std::string& eps_str,
                 const std::string& out_flag) {
    auto ws = parse_config(config);
    const Rat eps = eps_str.empty() ? kDefaultEpsilon : parse_rational_or_throw(eps_str);
    auto pred = classify(ws, eps);
    json j = prediction_json(ws, pred);
    j["epsilon"] = to_string(eps);
    std::cout << j.dump(2) << "\n";
    if (!out_flag.empty()) {
        std::ofstream f(out_dir(out_flag) / "verdict.json");
        f << j.dump(2) << "\n";
    }
    return kExitOk;
}

int run_simulate(const std::string& config, const SimFlags& flags, bool certify,
                 const std::string& out_flag, const std::string& snapshot, long seed) {
    auto ws = parse_config(config);
    apply_amplitude(ws, flags.amplitude);
    Grid g = grid_from_flags(flags);
    EvolveOptions opts;
    if (flags.threshold > 0) opts.threshold_factor = flags.threshold;
    const auto dir = out_dir(out_flag);
    std::filesystem::create_directories(dir);
    if (!snapshot.empty()) opts.snapshot_path = (dir / snapshot).string();

    auto evo = evolve(ws, g, default_probes(ws), opts);
    for (const auto& pr : evo.probes) {
        const std::string name =
            std::string("probe_") + ws.fields[pr.field] + "_" + probe_tag(pr.kind) + ".csv";
        write_series_csv(dir / name, pr.series);
        if (pr.kind == Probe::Kind::Moment) {
            write_series_csv(dir / (std::string("moment3d_") + ws.fields[pr.field] + ".csv"),
                             pr.moment_3d);
        }
    }

    json j;
    j["seed"] = seed;
    j["reached_t"] = evo.reached_t;
    j["initial_amplitude"] = evo.initial_amplitude;
    j["blowup_detected"] = evo.blowup.has_value();
    if (evo.blowup) {
        j["blowup"] = {{"t", evo.blowup->t},
                       {"u", evo.blowup->u},
                       {"v", evo.blowup->v},
                       {"field", ws.fields[evo.blowup->field]},
                       {"trigger", evo.blowup->trigger == BlowupInfo::Trigger::Threshold
                                       ? "threshold"
                                       : "nan"}};
    }
    int code = kExitOk;
    if (evo.instability) {
        j["instability"] = true;
        code = kExitInstability;
    }
    if (certify) {
        auto cert = detect_blowup(ws, g, opts);
        j["certificate_requested"] = true;
        if (cert) {
            j["certificate"] = {{"t_coarse", cert->t_coarse},
                                {"t_medium", cert->t_medium},
                                {"t_fine", cert->t_fine},
                                {"convergence_ratio", cert->convergence_ratio},
                                {"u", cert->u},
                                {"v", cert->v}};
        } else {
            j["certificate"] = nullptr;
            if (evo.blowup) code = kExitInconclusive;  // triggered but not refinement-stable
        }
    }
    std::cout << j.dump(2) << "\n";
    std::ofstream f(dir / "simulate.json");
    f << j.dump(2) << "\n";
    return code;
}

int run_sweep(const std::string& config, const std::string& param, const std::string& range,
              const std::string& mode, int jobs, const SimFlags& flags,
              const std::string& out_flag, long seed) {
    auto base = parse_config(config);
    apply_amplitude(base, flags.amplitude);
    auto path = parse_param_path(base, param);

    Rat a, b, step;
    {
        std::vector<std::string> parts;
        std::string cur;
        for (char c : range) {
            if (c == ':') { parts.push_back(cur); cur.clear(); }
            else cur += c;
        }
        parts.push_back(cur);
        if (parts.size() != 3) throw std::runtime_error("bad --range, want a:b:step");
        a = parse_rational_or_throw(parts[0]);
        b = parse_rational_or_throw(parts[1]);
        step = parse_rational_or_throw(parts[2]);
        if (step <= 0 || b < a) throw std::runtime_error("empty --range");
    }
    std::vector<Rat> values;
    for (Rat v = a; v <= b; v += step) values.push_back(v);
    if (values.empty()) throw std::runtime_error("empty --range");

    const bool do_classify = mode == "classify" || mode == "both";
    const bool do_simulate = mode == "simulate" || mode == "both";
    if (!do_classify && !do_simulate) throw std::runtime_error("bad --mode");

    std::vector<std::string> rows(values.size());
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const size_t k = next.fetch_add(1);
            if (k >= values.size()) return;
            WaveSystem ws = base;
            apply_param(ws, path, values[k]);
            std::string row = to_string(values[k]);
            if (do_classify) {
                auto pred = classify(ws);
                row += std::string(",") + to_string(pred.verdict);
                for (int f = 0; f < ws.field_count(); ++f)
                    row += "," + (pred.sigma_bounded ? fmt(to_double(pred.sigma[f])) : "div");
                for (int f = 0; f < ws.field_count(); ++f)
                    row += "," + (pred.s_solvable
                                      ? (pred.s[f] ? fmt(to_double(*pred.s[f])) : "inf")
                                      : std::string("none"));
            }
            if (do_simulate) {
                Grid g = grid_from_flags(flags);
                std::vector<Probe> probes;
                for (int f = 0; f < ws.field_count(); ++f) {
                    Probe rho;
                    rho.kind = Probe::Kind::FixedRho;
                    rho.parameter = 0.5;
                    rho.field = f;
                    probes.push_back(rho);
                }
                auto evo = evolve(ws, g, probes, {});
                row += evo.blowup ? ",1," + fmt(evo.blowup->t) : ",0,-1";
                for (int f = 0; f < ws.field_count(); ++f) {
                    std::string cell = "na";
                    try {
                        FitOptions fo;
                        fo.min_decades = 1.0;
                        cell = fmt(fit_decay(evo.probes[f].series, fo).exponent);
                    } catch (const std::exception&) {
                    }
                    row += "," + cell;
                }
            }
            rows[k] = row;
        }
    };
    const int nthreads = std::max(1, jobs);
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    std::ostringstream csv;
    csv << "# wavecrit sweep param=" << param << " seed=" << seed << "\n";
    csv << "param";
    if (do_classify) {
        csv << ",verdict";
        for (const auto& f : base.fields) csv << ",sigma_" << f;
        for (const auto& f : base.fields) csv << ",s_" << f;
    }
    if (do_simulate) {
        csv << ",blowup,blowup_t";
        for (const auto& f : base.fields) csv << ",fitted_s_" << f;
    }
    csv << "\n";
    for (const auto& r : rows) csv << r << "\n";
    std::cout << csv.str();
    if (!out_flag.empty()) {
        std::filesystem::create_directories(out_dir(out_flag));
        std::ofstream f(out_dir(out_flag) / "sweep.csv");
        f << csv.str();
    }
    return kExitOk;
}

int run_catalog(const std::string& name, int n, const std::string& q1s, const std::string& q2s,
                const std::string& alphas, const std::string& betas, const std::string& qdatas) {
    using namespace wavecrit::catalog;
    json j;
    j["name"] = name;
    j["n"] = n;
    auto side_str = [](Side s) {
        switch (s) {
            case Side::StableSide: return "stable-side";
            case Side::Critical: return "critical";
            default: return "unstable-side";
        }
    };
    auto rat = [](const std::string& s) { return parse_rational_or_throw(s); };
    if (name == "strauss") {
        j["value"] = strauss_exponent(n).approx();
    } else if (name == "glassey") {
        j["value"] = to_double(glassey_exponent(n));
        j["exact"] = to_string(glassey_exponent(n));
    } else if (name == "dv") {
        j["value"] = dv_exponent(n).approx();
    } else if (name == "two_strauss") {
        auto pos = two_strauss_on_curve(Quad{rat(q1s)}, Quad{rat(q2s)}, n);
        j["position"] = pos == CurvePosition::Above ? "above"
                        : pos == CurvePosition::On  ? "on"
                                                    : "below";
        j["verdict"] = side_str(two_strauss_side(Quad{rat(q1s)}, Quad{rat(q2s)}, n));
    } else if (name == "sg_scalar") {
        j["verdict"] = side_str(strauss_glassey_scalar_curve(Quad{rat(q1s)}, Quad{rat(q2s)}, n));
    } else if (name == "sg_system") {
        j["verdict"] = side_str(strauss_glassey_system_curve(Quad{rat(q1s)}, Quad{rat(q2s)}, n));
    } else if (name == "strauss_null") {
        j["verdict"] = side_str(strauss_null_curve(Quad{rat(q1s)}, Quad{rat(q2s)}, n));
    } else if (name == "kitamura") {
        j["verdict"] = side_str(kitamura_condition(Quad{rat(q1s)}, rat(alphas), rat(betas), n));
    } else if (name == "initial_tail") {
        j["verdict"] = side_str(initial_tail_condition(Quad{rat(q1s)}, rat(qdatas), n));
    } else {
        throw std::runtime_error("unknown catalog name '" + name + "'");
    }
    std::cout << j.dump(2) << "\n";
    return kExitOk;
}

int run_oracle(double c, double sigma, double z, double u0, double u, double v) {
    auto F = ForcingSpec::power(c, sigma, z, u0);
    auto psi = kernel_value_checked(F, u, v);
    json j;
    j["diverged"] = psi.diverged;
    if (!psi.diverged) {
        j["psi"] = psi.value;
        j["dv_psi"] = kernel_dv(F, u, v);
        j["du_psi"] = kernel_du(F, u, v);
    }
    std::cout << j.dump(2) << "\n";
    return psi.diverged ? kExitInconclusive : kExitOk;
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::string cur;
    for (char c : s + ",") {
        if (c == ',') {
            if (!cur.empty()) out.push_back(std::atof(cur.c_str()));
            cur.clear();
        } else {
            cur += c;
        }
    }
    return out;
}

int run_gronwall(const std::string& cs, const std::string& alphas, const std::string& ps,
                 const std::string& x0s, double t0, double tmax, const std::string& out_flag) {
    GronwallSystem g;
    g.c = parse_list(cs);
    g.alpha = parse_list(alphas);
    g.p = parse_list(ps);
    g.x0 = parse_list(x0s);
    g.n = static_cast<int>(g.c.size());
    g.t0 = t0;
    json j;
    j["hypotheses"] = check_hypotheses(g);
    auto res = integrate(g, tmax);
    const auto dir = out_dir(out_flag);
    std::filesystem::create_directories(dir);
    write_series_csv(dir / "gronwall_trajectory.csv", res.trajectory);
    j["trajectory_csv"] = (dir / "gronwall_trajectory.csv").string();
    int code = kExitOk;
    if (res.blowup_time) {
        j["verdict"] = "blowup";
        j["time"] = *res.blowup_time;
        j["refined_ok"] = res.refined_ok;
        if (!res.refined_ok) code = kExitInconclusive;
    } else if (j["hypotheses"].get<bool>()) {
        j["verdict"] = "inconclusive";  // the lemma promises blow-up past the horizon
        code = kExitInconclusive;
    } else {
        j["verdict"] = "no-blowup-by-horizon";
    }
    std::cout << j.dump(2) << "\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"critical-exponent classifier and characteristic simulator for "
                 "semilinear wave systems"};
    app.set_help_flag("--help", "print help");  // frees -h / --h for the grid step
    app.require_subcommand(1);

    std::string config, out_flag, eps_str, param, range, snapshot;
    std::string mode = "classify";
    SimFlags flags;
    bool certify = false;
    long seed = 0;
    int jobs = static_cast<int>(std::thread::hardware_concurrency());

    auto add_sim_flags = [&](CLI::App* cmd) {
        cmd->set_help_flag("--help", "print help");
        cmd->add_option("--h", flags.h, "grid step in u and v");
        cmd->add_option("--vmax", flags.vmax, "advanced-time extent");
        cmd->add_option("--umax", flags.umax, "retarded-time extent");
        cmd->add_option("--tmax", flags.tmax, "cap on t = u + v (0 = none)");
        cmd->add_option("--ustrip", flags.ustrip, "keep u <= ustrip marching past tmax");
        cmd->add_option("--amplitude", flags.amplitude, "override every field's data amplitude");
        cmd->add_option("--threshold", flags.threshold, "blow-up factor over initial amplitude");
    };

    auto* ccl = app.add_subcommand("classify", "exponent fixed-point verdict for a config");
    ccl->add_option("config", config)->required();
    ccl->add_option("--epsilon", eps_str, "robustness scale (rational)");
    ccl->add_option("--out", out_flag, "output directory");
    ccl->add_option("--seed", seed, "recorded in outputs");

    auto* csim = app.add_subcommand("simulate", "characteristic evolution with probes");
    csim->add_option("config", config)->required();
    add_sim_flags(csim);
    csim->add_flag("--certify", certify, "grid-refinement blow-up certificate");
    csim->add_option("--snapshot", snapshot, "binary snapshot file name");
    csim->add_option("--out", out_flag, "output directory");
    csim->add_option("--seed", seed, "recorded in outputs");

    auto* csw = app.add_subcommand("sweep", "classify/simulate across a parameter range");
    csw->add_option("config", config)->required();
    csw->add_option("--param", param, "term.K.power | data.FIELD.tail_exponent | ...")->required();
    csw->add_option("--range", range, "a:b:step, rational")->required();
    csw->add_option("--mode", mode, "classify | simulate | both");
    csw->add_option("--jobs", jobs, "worker threads");
    add_sim_flags(csw);
    csw->add_option("--out", out_flag, "output directory");
    csw->add_option("--seed", seed, "recorded in outputs");

    std::string cat_name, q1s = "3", q2s = "3", alphas = "0", betas = "0", qdatas = "1";
    int cat_n = 3;
    auto* ccat = app.add_subcommand("catalog", "closed-form exponents and curve verdicts");
    ccat->add_option("--name", cat_name)->required();
    ccat->add_option("--n", cat_n);
    ccat->add_option("--q1", q1s);
    ccat->add_option("--q2", q2s);
    ccat->add_option("--alpha", alphas);
    ccat->add_option("--beta", betas);
    ccat->add_option("--qdata", qdatas);

    double oc = 1, osigma = 2, oz = 2, ou0 = 1, ou = 10, ov = 100;
    auto* cor = app.add_subcommand("oracle", "exact 1+1 kernel values for power forcings");
    cor->add_option("--c", oc);
    cor->add_option("--sigma", osigma);
    cor->add_option("--z", oz);
    cor->add_option("--u0", ou0);
    cor->add_option("--u", ou)->required();
    cor->add_option("--v", ov)->required();

    std::string gcs = "1", galphas = "1", gps = "2", gx0s = "1";
    double gt0 = 1, gtmax = 1e10;
    auto* cgr = app.add_subcommand("gronwall", "cyclic comparison-system integrator");
    cgr->add_option("--c", gcs, "comma-separated constants");
    cgr->add_option("--alpha", galphas);
    cgr->add_option("--p", gps);
    cgr->add_option("--x0", gx0s);
    cgr->add_option("--t0", gt0);
    cgr->add_option("--tmax", gtmax);
    cgr->add_option("--out", out_flag);

    CLI11_PARSE(app, argc, argv);

    try {
        if (ccl->parsed()) return run_classify(config, eps_str, out_flag);
        if (csim->parsed()) return run_simulate(config, flags, certify, out_flag, snapshot, seed);
        if (csw->parsed()) return run_sweep(config, param, range, mode, jobs, flags, out_flag, seed);
        if (ccat->parsed()) return run_catalog(cat_name, cat_n, q1s, q2s, alphas, betas, qdatas);
        if (cor->parsed()) return run_oracle(oc, osigma, oz, ou0, ou, ov);
        if (cgr->parsed()) return run_gronwall(gcs, galphas, gps, gx0s, gt0, gtmax, out_flag);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitConfig;
}
