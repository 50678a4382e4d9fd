#ifndef CBD_REPORT_HPP
#define CBD_REPORT_HPP

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cbd/bell.hpp"
#include "cbd/coupling.hpp"
#include "cbd/json_io.hpp"
#include "cbd/system.hpp"

namespace cbd {

inline constexpr const char* kToolVersion = "cbd 0.1.0";

/// 64-bit FNV-1a, rendered as 16 hex digits.
inline std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string decimal(const Rational& r, int digits = 10) {
    std::ostringstream os;
    os.precision(digits);
    os << std::fixed << r.get_d();
    return os.str();
}

inline Json to_json(const Coupling& c) {
    Json roster = Json::array();
    for (const auto& v : c.system.roster()) roster.push_back(to_string(v));
    Json atoms = Json::object();
    for (const auto& [a, p] : c.atoms) atoms[outcome_key(c.system, c.system.roster(), a)] = to_string(p);
    return Json{{"roster", std::move(roster)}, {"atoms", std::move(atoms)}};
}

inline Json certificate_json(const std::vector<Rational>& dual, const std::vector<std::string>& labels, bool verified) {
    Json d = Json::array();
    for (const auto& y : dual) d.push_back(to_string(y));
    return Json{{"dual", std::move(d)}, {"constraints", labels}, {"verified", verified}};
}

inline Json to_json(const FeasibilityResult& r) {
    Json j{{"status", to_string(r.status)}};
    if (r.optimum) j["optimum"] = to_string(*r.optimum);
    if (!r.note.empty()) j["note"] = r.note;
    if (r.witness) j["witness"] = to_json(*r.witness);
    if (r.certificate) j["certificate"] = certificate_json(*r.certificate, r.constraint_labels, r.certificate_verified);
    return j;
}

inline Json to_json(const ChshReport& r) {
    Json values = Json::array(), dec = Json::array();
    for (const auto& v : r.values) {
        values.push_back(to_string(v));
        dec.push_back(decimal(v));
    }
    return Json{{"values", std::move(values)},
                {"values_decimal", std::move(dec)},
                {"max_value", to_string(r.max_value)},
                {"max_value_decimal", decimal(r.max_value)},
                {"classical_ok", r.classical_ok},
                {"tsirelson_ok", r.tsirelson_ok}};
}

inline Json to_json(const CorrelationTable& t) {
    Json e = Json::object();
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            e[t.alice[i] + "*" + t.bob[j] + "@" + t.context[i][j]] = to_string(t.expectation[i][j]);
    return e;
}

struct AnalysisOptions {
    bool skip_lp = false;
    CouplingOptions coupling;
};

/// The full pipeline on one system: consistency, CHSH (2x2 binary only),
/// identity coupling, per-connection maxima, and the jointly achievable
/// total of connection probabilities.
struct AnalysisReport {
    Json json;
    enum class Verdict { noncontextual, contextual, not_applicable } verdict = Verdict::not_applicable;
    std::optional<FeasibilityResult> identity;
    std::optional<TotalEqualityResult> total;
};

inline const char* to_string(AnalysisReport::Verdict v) {
    switch (v) {
        case AnalysisReport::Verdict::noncontextual: return "noncontextual";
        case AnalysisReport::Verdict::contextual: return "contextual";
        case AnalysisReport::Verdict::not_applicable: return "not_applicable";
    }
    return "?";
}

inline AnalysisReport analyze(const System& s, const AnalysisOptions& opt = {}) {
    AnalysisReport rep;
    Json& j = rep.json;
    const std::string canonical = serialize(s);
    j["tool"] = kToolVersion;
    j["input_digest"] = "fnv1a64:" + fnv1a_hex(canonical);

    const bool two_by_two = is_two_by_two(s);
    j["system"] = Json{{"contents", s.content_ids()},
                       {"contexts", s.contexts()},
                       {"variables", s.roster().size()},
                       {"shape", two_by_two ? "2x2-binary" : "general"},
                       {"coupling_polytope_variables", full_assignment_count(s).get_str()},
                       {"identity_polytope_variables", content_assignment_count(s).get_str()}};

    ConsistencyReport cons = is_consistently_connected(s);
    Json failures = Json::array();
    for (const auto& f : cons.failures) {
        Json m = Json::object();
        for (std::size_t k = 0; k < f.connection.variables.size(); ++k)
            m[to_string(f.connection.variables[k])] = to_json(f.marginals[k]);
        failures.push_back(Json{{"content", f.connection.content}, {"marginals", std::move(m)}});
    }
    j["consistency"] = Json{{"consistently_connected", cons.consistent}, {"failures", std::move(failures)}};

    if (two_by_two) {
        CorrelationTable t = correlation_table(s);
        ChshReport c = chsh(t);
        Json cj = to_json(c);
        cj["correlations"] = to_json(t);
        cj["advisory"] = !cons.consistent;
        if (auto it = s.provenance().find("rounding_bound"); it != s.provenance().end()) {
            if (auto slack = parse_rational(it->second)) {
                cj["rounding_bound"] = to_string(*slack);
                cj["tsirelson_ok_within_rounding"] = tsirelson_within(c, *slack);
            }
        }
        j["chsh"] = std::move(cj);
    }

    auto conns = connections(s);
    bool pairwise = true;
    Json cjs = Json::array();
    for (const auto& c : conns) {
        Json vars = Json::array();
        for (const auto& v : c.variables) vars.push_back(to_string(v));
        Json cj{{"content", c.content}, {"variables", std::move(vars)}};
        if (c.variables.size() == 2) cj["max_equality"] = to_string(max_connection_equality(s, c));
        else {
            cj["max_equality"] = nullptr;
            cj["note"] = "arity " + std::to_string(c.variables.size()) + " unsupported";
            pairwise = false;
        }
        cjs.push_back(std::move(cj));
    }
    j["connections"] = std::move(cjs);

    if (opt.skip_lp) {
        j["identity_coupling"] = Json{{"status", "skipped"}};
        j["total_connection_equality"] = Json{{"status", "skipped"}};
    } else {
        rep.identity = identity_coupling_feasible(s, opt.coupling);
        Json ij{{"status", to_string(rep.identity->status)}};
        if (!rep.identity->note.empty()) ij["note"] = rep.identity->note;
        if (rep.identity->certificate) ij["certificate_verified"] = rep.identity->certificate_verified;
        j["identity_coupling"] = std::move(ij);

        if (pairwise) {
            rep.total = max_total_connection_equality(s, opt.coupling);
            Json achieved = Json::array();
            for (const auto& a : rep.total->achieved) achieved.push_back(to_string(a));
            j["total_connection_equality"] = Json{{"status", "solved"},
                                                  {"optimum", to_string(rep.total->optimum)},
                                                  {"optimum_decimal", decimal(rep.total->optimum)},
                                                  {"sum_of_individual_maxima", to_string(rep.total->sum_of_maxima)},
                                                  {"achieved_per_connection", std::move(achieved)}};
            rep.verdict = rep.total->contextual ? AnalysisReport::Verdict::contextual
                                                : AnalysisReport::Verdict::noncontextual;
        } else {
            j["total_connection_equality"] = Json{{"status", "unsupported"},
                                                  {"note", "connections of arity >= 3 present"}};
        }
    }
    j["verdict"] = to_string(rep.verdict);
    return rep;
}

/// Witness bundle for an analysis: identity witness or certificate plus the
/// optimal coupling of the total-equality LP.
inline Json witness_bundle(const AnalysisReport& rep) {
    Json w = Json::object();
    if (rep.identity) w["identity_coupling"] = to_json(*rep.identity);
    if (rep.total) {
        w["total_connection_equality"] =
            Json{{"optimum", to_string(rep.total->optimum)},
                 {"witness", to_json(rep.total->witness)},
                 {"dual", certificate_json(rep.total->dual, rep.total->constraint_labels, true)["dual"]}};
    }
    return w;
}

/// Flat "path: value" lines derived from a JSON report.
inline void render_text(const Json& j, std::string& out, const std::string& path = "") {
    if (j.is_object()) {
        if (j.empty()) out += path + ": {}\n";
        for (const auto& [k, v] : j.items()) render_text(v, out, path.empty() ? k : path + "." + k);
    } else if (j.is_array()) {
        bool scalar = std::all_of(j.begin(), j.end(), [](const Json& e) { return !e.is_structured(); });
        if (scalar) {
            std::string line;
            for (const auto& e : j) line += (line.empty() ? "" : ", ") + (e.is_string() ? e.get<std::string>() : e.dump());
            out += path + ": [" + line + "]\n";
        } else {
            for (std::size_t i = 0; i < j.size(); ++i) render_text(j[i], out, path + "[" + std::to_string(i) + "]");
        }
    } else {
        out += path + ": " + (j.is_string() ? j.get<std::string>() : j.dump()) + "\n";
    }
}

inline std::string render_text(const Json& j) {
    std::string out;
    render_text(j, out);
    return out;
}

}  // namespace cbd

#endif
