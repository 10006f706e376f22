#pragma once

// Line-oriented system configs:
//
//   [system]
//   dimension = 3
//   fields = phi psi
//   [[term]]
//   equation = psi
//   source = phi
//   derivative = dt        # none | dt | du | dv
//   power = 2
//   coefficient = 1
//   t_weight = 0
//   u_weight = 0
//   [data.phi]
//   kind = compact         # compact | tail
//   amplitude = 0.01
//   radius = 1
//   tail_exponent = 2      # tail data only
//
// Rationals are accepted as p/q or decimal strings and kept exact.

#include "wave_system.hpp"

#include <fstream>
#include <sstream>

namespace wavecrit {

struct ConfigError : std::runtime_error {
    int line;
    ConfigError(int line_, const std::string& what)
        : std::runtime_error("line " + std::to_string(line_) + ": " + what), line(line_) {}
};

namespace detail {

inline std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline Rat parse_rat_at(const std::string& s, int line) {
    auto r = parse_rational(s);
    if (!r) throw ConfigError(line, "expected a rational, got '" + s + "'");
    return *r;
}

}  // namespace detail

inline WaveSystem parse_config_text(const std::string& text) {
    WaveSystem ws;
    ws.n = 3;
    enum class Sect { None, System, Term, Data } sect = Sect::None;
    int data_field = -1;
    std::vector<std::pair<std::string, std::pair<std::string, int>>> term_kv;  // deferred
    std::vector<std::vector<std::pair<std::string, std::pair<std::string, int>>>> raw_terms;
    std::vector<bool> seen_data;

    auto flush_term = [&]() {
        if (sect == Sect::Term) raw_terms.push_back(term_kv);
        term_kv.clear();
    };

    std::istringstream in(text);
    std::string raw;
    int line = 0;
    int system_line = -1;
    while (std::getline(in, raw)) {
        ++line;
        auto hash = raw.find('#');
        if (hash != std::string::npos) raw = raw.substr(0, hash);
        std::string s = detail::trim(raw);
        if (s.empty()) continue;
        if (s == "[system]") {
            flush_term();
            sect = Sect::System;
            system_line = line;
            continue;
        }
        if (s == "[[term]]") {
            flush_term();
            sect = Sect::Term;
            continue;
        }
        if (s.rfind("[data.", 0) == 0 && s.back() == ']') {
            flush_term();
            const std::string name = s.substr(6, s.size() - 7);
            data_field = ws.field_index(name);
            if (data_field < 0) throw ConfigError(line, "data block for unknown field '" + name + "'");
            if (seen_data[data_field]) throw ConfigError(line, "duplicate data block for '" + name + "'");
            seen_data[data_field] = true;
            ws.data[data_field].declared = true;
            sect = Sect::Data;
            continue;
        }
        if (s.front() == '[') throw ConfigError(line, "unknown section '" + s + "'");
        auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError(line, "expected key = value");
        const std::string key = detail::trim(s.substr(0, eq));
        const std::string val = detail::trim(s.substr(eq + 1));
        switch (sect) {
            case Sect::None:
                throw ConfigError(line, "key outside any section");
            case Sect::System:
                if (key == "dimension") {
                    ws.n = static_cast<int>(to_double(detail::parse_rat_at(val, line)));
                    if (ws.n < 2) throw ConfigError(line, "dimension must be at least 2");
                } else if (key == "fields") {
                    std::istringstream fs(val);
                    std::string name;
                    while (fs >> name) {
                        if (ws.field_index(name) >= 0)
                            throw ConfigError(line, "duplicate field '" + name + "'");
                        ws.fields.push_back(name);
                    }
                    ws.data.resize(ws.fields.size());
                    seen_data.assign(ws.fields.size(), false);
                } else {
                    throw ConfigError(line, "unknown [system] key '" + key + "'");
                }
                break;
            case Sect::Term:
                term_kv.emplace_back(key, std::make_pair(val, line));
                break;
            case Sect::Data: {
                auto& d = ws.data[data_field];
                if (key == "kind") {
                    if (val == "compact") d.kind = DataSpec::Kind::Compact;
                    else if (val == "tail") d.kind = DataSpec::Kind::Tail;
                    else throw ConfigError(line, "unknown data kind '" + val + "'");
                } else if (key == "tail_exponent") {
                    d.tail_exponent = detail::parse_rat_at(val, line);
                    if (d.tail_exponent <= 0)
                        throw ConfigError(line, "tail_exponent must be positive");
                } else if (key == "amplitude") {
                    d.amplitude = detail::parse_rat_at(val, line);
                } else if (key == "radius") {
                    d.radius = detail::parse_rat_at(val, line);
                    if (d.radius <= 0) throw ConfigError(line, "radius must be positive");
                } else {
                    throw ConfigError(line, "unknown [data] key '" + key + "'");
                }
                break;
            }
        }
    }
    flush_term();
    if (system_line < 0) throw ConfigError(1, "missing [system] section");
    if (ws.fields.empty()) throw ConfigError(system_line, "no fields declared");

    for (const auto& kvs : raw_terms) {
        NonlinearTerm t;
        bool have_eq = false, have_src = false, have_pow = false;
        int term_line = kvs.empty() ? system_line : kvs.front().second.second;
        for (const auto& [key, vl] : kvs) {
            const auto& [val, kline] = vl;
            if (key == "equation") {
                t.equation = ws.field_index(val);
                if (t.equation < 0) throw ConfigError(kline, "term references unknown field '" + val + "'");
                have_eq = true;
            } else if (key == "source") {
                t.source = ws.field_index(val);
                if (t.source < 0) throw ConfigError(kline, "term references unknown field '" + val + "'");
                have_src = true;
            } else if (key == "derivative") {
                if (val == "none") t.derivative = DerivKind::None;
                else if (val == "dt") t.derivative = DerivKind::Dt;
                else if (val == "du") t.derivative = DerivKind::Du;
                else if (val == "dv") t.derivative = DerivKind::Dv;
                else throw ConfigError(kline, "unknown derivative kind '" + val + "'");
            } else if (key == "power") {
                t.power = detail::parse_rat_at(val, kline);
                if (t.power <= 1) throw ConfigError(kline, "power must exceed 1");
                have_pow = true;
            } else if (key == "coefficient") {
                t.coefficient = detail::parse_rat_at(val, kline);
            } else if (key == "t_weight") {
                t.t_weight = detail::parse_rat_at(val, kline);
            } else if (key == "u_weight") {
                t.u_weight = detail::parse_rat_at(val, kline);
            } else {
                throw ConfigError(kline, "unknown [[term]] key '" + key + "'");
            }
        }
        if (!have_eq) throw ConfigError(term_line, "term needs an equation field");
        if (!have_src) throw ConfigError(term_line, "term needs a source field");
        if (!have_pow) throw ConfigError(term_line, "term needs a power");
        ws.terms.push_back(t);
    }
    ws.validate();
    return ws;
}

inline WaveSystem parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

inline std::string print_config(const WaveSystem& ws) {
    std::ostringstream out;
    out << "[system]\n";
    out << "dimension = " << ws.n << "\n";
    out << "fields =";
    for (const auto& f : ws.fields) out << " " << f;
    out << "\n";
    for (const auto& t : ws.terms) {
        out << "\n[[term]]\n";
        out << "equation = " << ws.fields[t.equation] << "\n";
        out << "source = " << ws.fields[t.source] << "\n";
        out << "derivative = " << to_string(t.derivative) << "\n";
        out << "power = " << to_string(t.power) << "\n";
        out << "coefficient = " << to_string(t.coefficient) << "\n";
        out << "t_weight = " << to_string(t.t_weight) << "\n";
        out << "u_weight = " << to_string(t.u_weight) << "\n";
    }
    for (size_t f = 0; f < ws.fields.size(); ++f) {
        if (!ws.data[f].declared) continue;
        out << "\n[data." << ws.fields[f] << "]\n";
        out << "kind = " << (ws.data[f].kind == DataSpec::Kind::Tail ? "tail" : "compact") << "\n";
        if (ws.data[f].kind == DataSpec::Kind::Tail)
            out << "tail_exponent = " << to_string(ws.data[f].tail_exponent) << "\n";
        out << "amplitude = " << to_string(ws.data[f].amplitude) << "\n";
        out << "radius = " << to_string(ws.data[f].radius) << "\n";
    }
    return out.str();
}

}  // namespace wavecrit
