#pragma once

// Symbolic description of a semilinear wave system: fields, power-type
// nonlinear terms with optional derivative kind and t/u weights, and the
// per-field initial data shape.

#include "rational.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace wavecrit {

enum class DerivKind { None, Dt, Du, Dv };

inline const char* to_string(DerivKind d) {
    switch (d) {
        case DerivKind::None: return "none";
        case DerivKind::Dt: return "dt";
        case DerivKind::Du: return "du";
        case DerivKind::Dv: return "dv";
    }
    return "?";
}

struct NonlinearTerm {
    int equation = 0;   // field index the term forces
    int source = 0;     // field index inside |.|^q
    DerivKind derivative = DerivKind::None;
    Rat power = Rat(2);        // q > 1
    Rat coefficient = Rat(1);  // excluded from the classifier when 0
    Rat t_weight = Rat(0);     // alpha in t^alpha u^beta |D phi|^q
    Rat u_weight = Rat(0);     // beta
};

struct DataSpec {
    enum class Kind { Compact, Tail };
    Kind kind = Kind::Compact;
    Rat tail_exponent = Rat(1);   // q_data > 0, tail data only
    Rat amplitude = Rat(1, 100);  // bump height c of the data family
    Rat radius = Rat(1);          // support radius
    bool declared = false;        // whether the config carried a [data.*] block
};

struct WaveSystem {
    int n = 3;  // spatial dimension
    std::vector<std::string> fields;
    std::vector<NonlinearTerm> terms;
    std::vector<DataSpec> data;  // one per field

    int field_count() const { return static_cast<int>(fields.size()); }

    int field_index(const std::string& name) const {
        for (int i = 0; i < field_count(); ++i)
            if (fields[i] == name) return i;
        return -1;
    }

    void validate() const {
        if (n < 2) throw std::invalid_argument("wave system: n >= 2 required");
        if (fields.empty()) throw std::invalid_argument("wave system: no fields");
        if (data.size() != fields.size())
            throw std::invalid_argument("wave system: one data spec per field required");
        for (const auto& t : terms) {
            if (t.equation < 0 || t.equation >= field_count() || t.source < 0 ||
                t.source >= field_count())
                throw std::invalid_argument("wave system: term references unknown field");
            if (t.power <= 1) throw std::invalid_argument("wave system: power must exceed 1");
        }
        for (const auto& d : data) {
            if (d.kind == DataSpec::Kind::Tail && d.tail_exponent <= 0)
                throw std::invalid_argument("wave system: tail exponent must be positive");
            if (d.radius <= 0) throw std::invalid_argument("wave system: data radius must be positive");
        }
    }
};

}  // namespace wavecrit
