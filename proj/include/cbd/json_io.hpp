#ifndef CBD_JSON_IO_HPP
#define CBD_JSON_IO_HPP

#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "cbd/system.hpp"

namespace cbd {

using Json = nlohmann::ordered_json;

/// The input is not well-formed JSON at all (as opposed to a JSON document
/// describing an invalid system).
class JsonSyntaxError : public Error {
public:
    using Error::Error;
};

namespace detail {

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(sep, start);
        parts.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

}  // namespace detail

/// Converts a parsed JSON document into a RawSystem. Structural problems are
/// appended to `issues`; the returned RawSystem holds whatever was readable.
inline RawSystem raw_system_from_json(const nlohmann::json& doc, std::vector<ValidationIssue>& issues) {
    RawSystem raw;
    auto schema = [&](std::string loc, std::string msg) { issues.push_back({"schema", std::move(loc), std::move(msg)}); };
    auto string_list = [&](const nlohmann::json& j, const std::string& loc, std::vector<std::string>& into) {
        if (!j.is_array()) {
            schema(loc, "expected an array of strings");
            return false;
        }
        for (const auto& e : j) {
            if (!e.is_string()) {
                schema(loc, "expected an array of strings");
                return false;
            }
            into.push_back(e.get<std::string>());
        }
        return true;
    };

    if (!doc.is_object()) {
        schema("/", "top level must be an object");
        return raw;
    }

    if (auto it = doc.find("contents"); it == doc.end() || !it->is_object()) {
        schema("contents", "missing or not an object");
    } else {
        for (const auto& [id, alpha] : it->items()) {
            std::vector<std::string> labels;
            if (string_list(alpha, "contents/" + id, labels)) raw.contents.emplace_back(id, std::move(labels));
        }
    }

    if (auto it = doc.find("contexts"); it == doc.end()) schema("contexts", "missing");
    else string_list(*it, "contexts", raw.contexts);

    auto blocks = doc.find("blocks");
    if (blocks == doc.end() || !blocks->is_array()) {
        schema("blocks", "missing or not an array");
    } else {
        for (std::size_t b = 0; b < blocks->size(); ++b) {
            const auto& jb = (*blocks)[b];
            std::string loc = "blocks[" + std::to_string(b) + "]";
            if (!jb.is_object() || !jb.contains("context") || !jb["context"].is_string()) {
                schema(loc, "block needs a string 'context'");
                continue;
            }
            RawBlock rb;
            rb.context = jb["context"].get<std::string>();
            loc += " (context '" + rb.context + "')";
            bool ok = true;
            if (!jb.contains("variables") || !jb["variables"].is_array()) {
                schema(loc, "block needs a 'variables' array");
                ok = false;
            } else {
                for (const auto& jv : jb["variables"]) {
                    if (!jv.is_object() || !jv.contains("content") || !jv["content"].is_string()) {
                        schema(loc, "each variable needs a string 'content'");
                        ok = false;
                        continue;
                    }
                    RawVariable rv{jv["content"].get<std::string>(), std::nullopt};
                    if (jv.contains("outcomes")) {
                        std::vector<std::string> labels;
                        if (string_list(jv["outcomes"], loc + " variable '" + rv.content + "'", labels))
                            rv.outcomes = std::move(labels);
                        else
                            ok = false;
                    }
                    rb.variables.push_back(std::move(rv));
                }
            }
            if (!jb.contains("pmf") || !jb["pmf"].is_object()) {
                schema(loc, "block needs a 'pmf' object");
                ok = false;
            } else {
                for (const auto& [key, jp] : jb["pmf"].items()) {
                    std::optional<Rational> p;
                    if (jp.is_string()) p = parse_rational(jp.get<std::string>());
                    else if (jp.is_number_integer()) p = Rational(jp.dump());
                    if (!p) {
                        issues.push_back({"bad_probability", loc + " outcome '" + key + "'",
                                          "probability must be a \"p/q\" or decimal string, got " + jp.dump()});
                        ok = false;
                        continue;
                    }
                    rb.pmf.emplace_back(detail::split(key, ','), *p);
                }
            }
            if (ok) raw.blocks.push_back(std::move(rb));
        }
    }

    if (auto it = doc.find("provenance"); it != doc.end() && it->is_object()) {
        for (const auto& [k, v] : it->items()) raw.provenance[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
    return raw;
}

inline ValidationOutcome validate_system(const nlohmann::json& doc) {
    std::vector<ValidationIssue> issues;
    RawSystem raw = raw_system_from_json(doc, issues);
    ValidationOutcome out = validate_system(raw);
    if (!issues.empty()) {
        out.system.reset();
        issues.insert(issues.end(), out.issues.begin(), out.issues.end());
        out.issues = std::move(issues);
    }
    return out;
}

/// Parses system JSON text. Throws JsonSyntaxError if the text is not JSON.
inline ValidationOutcome parse_system(std::string_view text) {
    nlohmann::json doc = nlohmann::json::parse(text.begin(), text.end(), nullptr, false);
    if (doc.is_discarded()) throw JsonSyntaxError("input is not valid JSON");
    return validate_system(doc);
}

inline std::string outcome_key(const System& system, const std::vector<VariableId>& vars, const OutcomeTuple& t) {
    std::string key;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (i) key += ',';
        key += system.alphabet(vars[i].content)[t[i]];
    }
    return key;
}

inline Json to_json(const System& system) {
    Json doc;
    Json contents = Json::object();
    for (const auto& [id, alpha] : system.contents()) contents[id] = alpha;
    doc["contents"] = std::move(contents);
    doc["contexts"] = system.contexts();
    Json blocks = Json::array();
    for (const auto& b : system.blocks()) {
        Json jb;
        jb["context"] = b.context;
        Json vars = Json::array();
        for (const auto& v : b.variables) vars.push_back(Json{{"content", v.content}});
        jb["variables"] = std::move(vars);
        Json pmf = Json::object();
        for (const auto& [t, p] : b.pmf) pmf[outcome_key(system, b.variables, t)] = to_string(p);
        jb["pmf"] = std::move(pmf);
        blocks.push_back(std::move(jb));
    }
    doc["blocks"] = std::move(blocks);
    if (!system.provenance().empty()) {
        Json prov = Json::object();
        for (const auto& [k, v] : system.provenance()) prov[k] = v;
        doc["provenance"] = std::move(prov);
    }
    return doc;
}

inline std::string serialize(const System& system) { return to_json(system).dump(2) + "\n"; }

inline Json to_json(const ValidationIssue& i) {
    return Json{{"code", i.code}, {"location", i.location}, {"message", i.message}};
}

inline Json to_json(const std::vector<ValidationIssue>& issues) {
    Json arr = Json::array();
    for (const auto& i : issues) arr.push_back(to_json(i));
    return Json{{"valid", issues.empty()}, {"issues", std::move(arr)}};
}

inline Json to_json(const Pmf& pmf) {
    Json arr = Json::array();
    for (const auto& p : pmf) arr.push_back(to_string(p));
    return arr;
}

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace cbd

#endif
