#ifndef CBD_SYSTEM_HPP
#define CBD_SYSTEM_HPP

#include <algorithm>
#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cbd/errors.hpp"
#include "cbd/rational.hpp"

namespace cbd {

/// A random output is identified by what it measures (content) and the
/// complete condition under which it was recorded (context).
struct VariableId {
    std::string content;
    std::string context;

    auto operator<=>(const VariableId&) const = default;
};

inline std::string to_string(const VariableId& v) { return v.content + "@" + v.context; }

/// Outcome indices into each variable's alphabet, in declared variable order.
using OutcomeTuple = std::vector<std::uint32_t>;

/// A pmf over one variable's alphabet, aligned with the alphabet order.
using Pmf = std::vector<Rational>;

using Provenance = std::map<std::string, std::string>;

/// The jointly distributed bundle of variables recorded in one context.
/// Only atoms with positive probability are stored.
struct ContextBlock {
    std::string context;
    std::vector<VariableId> variables;
    std::map<OutcomeTuple, Rational> pmf;

    bool operator==(const ContextBlock&) const = default;
};

/// All variables of one content that appear in two or more contexts,
/// ordered by context id.
struct Connection {
    std::string content;
    std::vector<VariableId> variables;

    bool operator==(const Connection&) const = default;
};

// Untrusted system description, as read from a file or assembled by a
// generator. validate_system() turns it into a System or a report.

struct RawVariable {
    std::string content;
    std::optional<std::vector<std::string>> outcomes;
};

struct RawBlock {
    std::string context;
    std::vector<RawVariable> variables;
    std::vector<std::pair<std::vector<std::string>, Rational>> pmf;
};

struct RawSystem {
    std::vector<std::pair<std::string, std::vector<std::string>>> contents;
    std::vector<std::string> contexts;
    std::vector<RawBlock> blocks;
    Provenance provenance;
};

struct ValidationIssue {
    std::string code;
    std::string location;
    std::string message;
};

struct ValidationOutcome;

ValidationOutcome validate_system(const RawSystem& raw);

/// An immutable, validated system of context blocks. Copies share state.
/// There is deliberately no representation of any cross-context joint.
class System {
public:
    /// Content ids (sorted) with their alphabets.
    const std::map<std::string, std::vector<std::string>>& contents() const { return d_->contents; }
    const std::vector<std::string>& content_ids() const { return d_->content_ids; }
    /// Context ids in declared order.
    const std::vector<std::string>& contexts() const { return d_->contexts; }
    /// One block per context, in context order.
    const std::vector<ContextBlock>& blocks() const { return d_->blocks; }
    /// Every variable, block by block in declared variable order.
    const std::vector<VariableId>& roster() const { return d_->roster; }
    const Provenance& provenance() const { return d_->provenance; }

    const std::vector<std::string>& alphabet(const std::string& content) const {
        auto it = d_->contents.find(content);
        if (it == d_->contents.end()) throw UnknownVariableError("unknown content '" + content + "'");
        return it->second;
    }

    std::optional<std::size_t> roster_index(const VariableId& v) const {
        auto it = d_->roster_pos.find(v);
        if (it == d_->roster_pos.end()) return std::nullopt;
        return it->second;
    }

    std::size_t content_index(const std::string& content) const {
        auto it = std::lower_bound(d_->content_ids.begin(), d_->content_ids.end(), content);
        if (it == d_->content_ids.end() || *it != content)
            throw UnknownVariableError("unknown content '" + content + "'");
        return static_cast<std::size_t>(it - d_->content_ids.begin());
    }

    std::size_t block_index(const std::string& context) const {
        auto it = std::find(d_->contexts.begin(), d_->contexts.end(), context);
        if (it == d_->contexts.end()) throw UnknownVariableError("unknown context '" + context + "'");
        return static_cast<std::size_t>(it - d_->contexts.begin());
    }

    /// (block index, position within block) of a variable.
    std::pair<std::size_t, std::size_t> locate(const VariableId& v) const {
        auto idx = roster_index(v);
        if (!idx) throw UnknownVariableError("unknown variable '" + to_string(v) + "'");
        return d_->roster_loc[*idx];
    }

    /// Equality ignores provenance; it compares the probabilistic content.
    bool operator==(const System& o) const {
        return d_ == o.d_ || (d_->contents == o.d_->contents && d_->contexts == o.d_->contexts &&
                              d_->blocks == o.d_->blocks);
    }

private:
    struct Data {
        std::map<std::string, std::vector<std::string>> contents;
        std::vector<std::string> content_ids;
        std::vector<std::string> contexts;
        std::vector<ContextBlock> blocks;
        std::vector<VariableId> roster;
        std::vector<std::pair<std::size_t, std::size_t>> roster_loc;
        std::map<VariableId, std::size_t> roster_pos;
        Provenance provenance;
    };

    explicit System(std::shared_ptr<const Data> d) : d_(std::move(d)) {}
    friend ValidationOutcome validate_system(const RawSystem& raw);

    std::shared_ptr<const Data> d_;
};

struct ValidationOutcome {
    std::optional<System> system;
    std::vector<ValidationIssue> issues;

    bool ok() const { return system.has_value(); }
};

namespace detail {

inline std::string join(const std::vector<std::string>& parts, char sep = ',') {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

}  // namespace detail

inline ValidationOutcome validate_system(const RawSystem& raw) {
    ValidationOutcome out;
    auto issue = [&](std::string code, std::string location, std::string message) {
        out.issues.push_back({std::move(code), std::move(location), std::move(message)});
    };

    auto data = std::make_shared<System::Data>();
    data->provenance = raw.provenance;

    for (const auto& [id, alphabet] : raw.contents) {
        std::string loc = "contents/" + id;
        if (id.empty()) issue("empty_id", "contents", "content id must be non-empty");
        if (id.find_first_of("@~,") != std::string::npos)
            issue("bad_id", loc, "content id must not contain '@', '~' or ','");
        if (data->contents.count(id)) {
            issue("duplicate_content", loc, "content declared twice");
            continue;
        }
        if (alphabet.empty()) issue("empty_alphabet", loc, "alphabet must have at least one outcome");
        std::set<std::string> seen;
        for (const auto& label : alphabet) {
            if (label.empty() || label.find(',') != std::string::npos)
                issue("bad_outcome_label", loc, "outcome label '" + label + "' is empty or contains ','");
            if (!seen.insert(label).second) issue("duplicate_outcome", loc, "outcome '" + label + "' repeated");
        }
        data->contents.emplace(id, alphabet);
    }
    for (const auto& [id, _] : data->contents) data->content_ids.push_back(id);

    std::set<std::string> context_set;
    for (const auto& ctx : raw.contexts) {
        if (ctx.empty()) issue("empty_id", "contexts", "context id must be non-empty");
        if (ctx.find_first_of("@~,") != std::string::npos)
            issue("bad_id", "contexts/" + ctx, "context id must not contain '@', '~' or ','");
        if (!context_set.insert(ctx).second) issue("duplicate_context", "contexts/" + ctx, "context declared twice");
    }
    data->contexts = raw.contexts;

    std::map<std::string, const RawBlock*> block_of;
    for (std::size_t b = 0; b < raw.blocks.size(); ++b) {
        const RawBlock& blk = raw.blocks[b];
        std::string loc = "blocks[" + std::to_string(b) + "] (context '" + blk.context + "')";
        if (!context_set.count(blk.context)) {
            issue("unknown_context", loc, "block refers to undeclared context '" + blk.context + "'");
            continue;
        }
        if (block_of.count(blk.context)) {
            issue("duplicate_block", loc, "context already has a block");
            continue;
        }
        block_of[blk.context] = &blk;
    }
    for (const auto& ctx : raw.contexts)
        if (!block_of.count(ctx)) issue("missing_block", "contexts/" + ctx, "context has no block");

    std::set<std::string> used_contents;
    std::vector<ContextBlock> blocks;
    bool blocks_ok = true;
    for (const auto& ctx : raw.contexts) {
        auto found = block_of.find(ctx);
        if (found == block_of.end()) {
            blocks_ok = false;
            continue;
        }
        const RawBlock& blk = *found->second;
        std::string loc = "block '" + ctx + "'";
        ContextBlock cb;
        cb.context = ctx;
        std::vector<const std::vector<std::string>*> alphabets;
        bool vars_ok = true;
        std::set<std::string> in_block;

        if (blk.variables.empty()) {
            issue("empty_block", loc, "block has no variables");
            vars_ok = false;
        }
        for (const auto& var : blk.variables) {
            std::string vloc = loc + " variable '" + var.content + "@" + ctx + "'";
            auto c = data->contents.find(var.content);
            if (c == data->contents.end()) {
                issue("unknown_content", vloc, "variable refers to undeclared content '" + var.content + "'");
                vars_ok = false;
                continue;
            }
            if (!in_block.insert(var.content).second) {
                issue("duplicate_variable", vloc, "content appears twice in one context");
                vars_ok = false;
                continue;
            }
            if (var.outcomes && *var.outcomes != c->second) {
                issue("alphabet_mismatch", vloc,
                      "alphabet mismatch: {" + detail::join(*var.outcomes) + "} differs from content alphabet {" +
                          detail::join(c->second) + "}");
                vars_ok = false;
            }
            used_contents.insert(var.content);
            cb.variables.push_back({var.content, ctx});
            alphabets.push_back(&c->second);
        }
        if (!vars_ok) {
            blocks_ok = false;
            continue;
        }

        Rational total = 0;
        bool pmf_ok = true;
        for (const auto& [labels, p] : blk.pmf) {
            std::string key = detail::join(labels);
            std::string kloc = loc + " outcome '" + key + "'";
            if (labels.size() != alphabets.size()) {
                issue("arity_mismatch", kloc,
                      "joint outcome has " + std::to_string(labels.size()) + " components, block has " +
                          std::to_string(alphabets.size()) + " variables");
                pmf_ok = false;
                continue;
            }
            OutcomeTuple tuple;
            bool labels_ok = true;
            for (std::size_t i = 0; i < labels.size(); ++i) {
                const auto& alpha = *alphabets[i];
                auto it = std::find(alpha.begin(), alpha.end(), labels[i]);
                if (it == alpha.end()) {
                    issue("outcome_not_in_alphabet", kloc,
                          "'" + labels[i] + "' is not an outcome of content '" + cb.variables[i].content + "'");
                    labels_ok = false;
                    break;
                }
                tuple.push_back(static_cast<std::uint32_t>(it - alpha.begin()));
            }
            if (!labels_ok) {
                pmf_ok = false;
                continue;
            }
            if (p < 0) {
                issue("negative_probability", kloc, "probability " + to_string(p) + " is negative");
                pmf_ok = false;
            }
            if (cb.pmf.count(tuple)) {
                issue("duplicate_outcome_key", kloc, "joint outcome listed twice");
                pmf_ok = false;
                continue;
            }
            total += p;
            cb.pmf.emplace(std::move(tuple), p);
        }
        if (pmf_ok && total != 1)
            issue("pmf_not_normalized", loc, "pmf not normalized: probabilities sum to " + to_string(total));
        if (!pmf_ok || total != 1) {
            blocks_ok = false;
            continue;
        }
        std::erase_if(cb.pmf, [](const auto& kv) { return kv.second == 0; });
        blocks.push_back(std::move(cb));
    }

    for (const auto& id : data->content_ids)
        if (!used_contents.count(id)) issue("unused_content", "contents/" + id, "content appears in no context");

    if (!out.issues.empty() || !blocks_ok) return out;

    data->blocks = std::move(blocks);
    for (std::size_t b = 0; b < data->blocks.size(); ++b) {
        const auto& vars = data->blocks[b].variables;
        for (std::size_t i = 0; i < vars.size(); ++i) {
            data->roster_pos[vars[i]] = data->roster.size();
            data->roster.push_back(vars[i]);
            data->roster_loc.emplace_back(b, i);
        }
    }
    out.system = System(std::move(data));
    return out;
}

/// Validates and returns the system, throwing ArgumentError with the first
/// issue otherwise. Convenient for generators and tests.
inline System make_system(const RawSystem& raw) {
    auto outcome = validate_system(raw);
    if (!outcome.ok()) {
        const auto& i = outcome.issues.front();
        throw ArgumentError("invalid system: " + i.location + ": " + i.message);
    }
    return std::move(*outcome.system);
}

/// Marginal of the variable at `position` within a block.
inline Pmf block_marginal(const System& system, const ContextBlock& block, std::size_t position) {
    Pmf out(system.alphabet(block.variables.at(position).content).size(), Rational(0));
    for (const auto& [tuple, p] : block.pmf) out[tuple[position]] += p;
    return out;
}

inline Pmf marginal(const System& system, const VariableId& variable) {
    auto [b, pos] = system.locate(variable);
    return block_marginal(system, system.blocks()[b], pos);
}

/// One Connection per content recorded in two or more contexts, ordered by
/// content id and, within a connection, by context id.
inline std::vector<Connection> connections(const System& system) {
    std::map<std::string, std::vector<VariableId>> by_content;
    for (const auto& v : system.roster()) by_content[v.content].push_back(v);
    std::vector<Connection> out;
    for (auto& [content, vars] : by_content) {
        if (vars.size() < 2) continue;
        std::sort(vars.begin(), vars.end());
        out.push_back({content, std::move(vars)});
    }
    return out;
}

struct ConnectionMismatch {
    Connection connection;
    std::vector<Pmf> marginals;  // aligned with connection.variables
};

struct ConsistencyReport {
    bool consistent = true;
    std::vector<ConnectionMismatch> failures;
};

inline ConsistencyReport is_consistently_connected(const System& system) {
    ConsistencyReport report;
    for (const auto& conn : connections(system)) {
        std::vector<Pmf> margs;
        for (const auto& v : conn.variables) margs.push_back(marginal(system, v));
        bool same = std::all_of(margs.begin(), margs.end(), [&](const Pmf& m) { return m == margs.front(); });
        if (!same) {
            report.consistent = false;
            report.failures.push_back({conn, std::move(margs)});
        }
    }
    return report;
}

}  // namespace cbd

#endif
