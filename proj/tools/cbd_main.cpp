// cbd: validate, analyze, generate and couple systems of context-indexed
// random variables.
//
// Exit codes: 0 success / non-contextual / feasible, 1 contextual / infeasible,
// 2 invalid system, 3 usage, I/O or parse error, 4 size guard refusal.

#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <iterator>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cbd/cbd.hpp"

namespace {

enum Exit : int { kOk = 0, kNegative = 1, kInvalid = 2, kUsage = 3, kGuard = 4 };

struct Globals {
    std::string format = "json";
    std::string lp_var_cap = "10000000";
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_input(const std::string& path) {
    if (path == "-") return std::string(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
    if (!std::filesystem::exists(path)) throw UsageError("no such file: '" + path + "'");
    return cbd::read_text(path);
}

void write_output(const std::string& path, const std::string& text) {
    if (path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write '" + path + "'");
    out << text;
}

void emit(const Globals& g, const cbd::Json& j) {
    if (g.format == "text") std::cout << cbd::render_text(j);
    else std::cout << j.dump(2) << "\n";
}

cbd::CouplingOptions coupling_options(const Globals& g) {
    cbd::CouplingOptions opt;
    if (opt.var_cap.set_str(g.lp_var_cap, 10) != 0 || opt.var_cap < 1)
        throw UsageError("--lp-var-cap must be a positive integer");
    return opt;
}

/// Loads a system; on validation failure prints the report and returns nullopt.
std::optional<cbd::System> load(const Globals& g, const std::string& path) {
    cbd::ValidationOutcome v;
    try {
        v = cbd::parse_system(read_input(path));
    } catch (const cbd::JsonSyntaxError& e) {
        throw UsageError(path + ": " + e.what());
    }
    if (!v.ok()) {
        emit(g, cbd::to_json(v.issues));
        return std::nullopt;
    }
    return v.system;
}

int cmd_validate(const Globals& g, const std::string& path) {
    auto s = load(g, path);
    if (!s) return kInvalid;
    emit(g, cbd::to_json(std::vector<cbd::ValidationIssue>{}));
    return kOk;
}

int analyze_one(const Globals& g, const cbd::System& s, bool skip_lp, const std::string& witness, cbd::Json& out) {
    cbd::AnalysisOptions opt;
    opt.skip_lp = skip_lp;
    opt.coupling = coupling_options(g);
    cbd::AnalysisReport rep = cbd::analyze(s, opt);
    out = rep.json;
    if (!witness.empty() && !skip_lp) {
        cbd::Json bundle = cbd::witness_bundle(rep);
        if (witness == "-") {
            out["witness"] = std::move(bundle);
        } else {
            write_output(witness, bundle.dump(2) + "\n");
            out["witness_path"] = witness;
        }
    }
    return rep.verdict == cbd::AnalysisReport::Verdict::contextual ? kNegative : kOk;
}

int cmd_analyze(const Globals& g, const std::string& path, bool skip_lp, const std::string& witness) {
    auto s = load(g, path);
    if (!s) return kInvalid;
    cbd::Json report;
    int code = analyze_one(g, *s, skip_lp, witness, report);
    emit(g, report);
    return code;
}

/// Every *.json file in a directory, analyzed concurrently; reports are kept
/// per file and the worst exit code wins.
int cmd_analyze_batch(const Globals& g, const std::string& dir, bool skip_lp) {
    if (!std::filesystem::is_directory(dir)) throw UsageError("not a directory: '" + dir + "'");
    std::vector<std::string> files;
    for (const auto& e : std::filesystem::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path().string());
    std::sort(files.begin(), files.end());

    struct Outcome {
        int code;
        cbd::Json report;
    };
    std::vector<std::future<Outcome>> jobs;
    for (const auto& f : files)
        jobs.push_back(std::async(std::launch::async, [&g, f, skip_lp]() -> Outcome {
            try {
                auto v = cbd::parse_system(cbd::read_text(f));
                if (!v.ok()) return {kInvalid, cbd::to_json(v.issues)};
                cbd::Json r;
                int code = analyze_one(g, *v.system, skip_lp, "", r);
                return {code, r};
            } catch (const cbd::SizeGuardError& e) {
                return {kGuard, cbd::Json{{"error", e.what()}, {"count", e.count().get_str()}}};
            } catch (const std::exception& e) {
                return {kUsage, cbd::Json{{"error", e.what()}}};
            }
        }));
    cbd::Json all = cbd::Json::object();
    int worst = kOk;
    for (std::size_t i = 0; i < files.size(); ++i) {
        Outcome o = jobs[i].get();
        worst = std::max(worst, o.code);
        all[files[i]] = cbd::Json{{"exit", o.code}, {"report", std::move(o.report)}};
    }
    emit(g, all);
    return worst;
}

struct GenerateArgs {
    std::string kind;
    std::string angles = "0,1/2 pi;1/4 pi,3/4 pi";
    std::string visibility = "1";
    long precision = 1'000'000;
    std::uint64_t seed = 1;
    std::string shape = "2x2";
    std::size_t outcomes = 2;
    long denominator = 12;
    bool uniform = false;
    std::string assignment;
    std::string out = "-";
};

int cmd_generate(const GenerateArgs& a) {
    std::optional<cbd::System> s;
    try {
        if (a.kind == "singlet") {
            auto v = cbd::parse_rational(a.visibility);
            if (!v) throw UsageError("--visibility must be a rational number");
            s = cbd::singlet_system(cbd::parse_angle_spec(a.angles), *v, a.precision);
        } else if (a.kind == "prbox") {
            s = cbd::pr_box();
        } else if (a.kind == "deterministic") {
            cbd::Design d = cbd::design_from_shape(a.shape, a.outcomes);
            std::map<std::string, std::string> assignment;
            for (const auto& [c, alpha] : d.contents) assignment[c] = alpha.front();
            if (!a.assignment.empty()) {
                for (const auto& part : cbd::detail::split(a.assignment, ',')) {
                    auto eq = part.find('=');
                    if (eq == std::string::npos) throw UsageError("--assignment expects content=outcome pairs");
                    assignment[part.substr(0, eq)] = part.substr(eq + 1);
                }
            }
            s = cbd::deterministic_system(assignment, d);
        } else if (a.kind == "random") {
            cbd::RandomOptions ro;
            ro.uniform_marginals = a.uniform;
            s = cbd::random_consistent_system(a.seed, cbd::design_from_shape(a.shape, a.outcomes), a.denominator, ro);
        } else {
            throw UsageError("unknown generator '" + a.kind + "' (singlet, prbox, deterministic, random)");
        }
    } catch (const cbd::ArgumentError& e) {
        throw UsageError(e.what());
    }
    write_output(a.out, cbd::serialize(*s));
    return kOk;
}

/// "A@ctx1~ctx2>=3/4"
cbd::Demand parse_demand(const cbd::System& s, const std::string& spec) {
    auto bad = [&](const std::string& why) { return UsageError("bad demand '" + spec + "': " + why); };
    auto at = spec.find('@'), tilde = spec.find('~'), ge = spec.find(">=");
    if (at == std::string::npos || tilde == std::string::npos || ge == std::string::npos || !(at < tilde && tilde < ge))
        throw bad("expected content@context1~context2>=bound");
    std::string content = spec.substr(0, at);
    std::string c1 = spec.substr(at + 1, tilde - at - 1), c2 = spec.substr(tilde + 1, ge - tilde - 1);
    auto bound = cbd::parse_rational(spec.substr(ge + 2));
    if (!bound) throw bad("bound is not a rational number");
    if (*bound < 0 || *bound > 1) throw bad("bound must lie in [0, 1]");
    for (const auto& conn : cbd::connections(s)) {
        if (conn.content != content) continue;
        if (conn.variables.size() != 2)
            throw bad("connection of '" + content + "' has arity " + std::to_string(conn.variables.size()) +
                      "; only pairs are supported");
        std::vector<cbd::VariableId> named{{content, c1}, {content, c2}};
        std::sort(named.begin(), named.end());
        if (named != conn.variables) throw bad("contexts do not match the connection of '" + content + "'");
        return cbd::Demand{conn, *bound};
    }
    throw bad("content '" + content + "' has no connection");
}

struct CoupleArgs {
    std::string path;
    bool identity = false, product = false, maximize = false, brute_force = false;
    std::vector<std::string> demands;
    std::string out = "-";
};

int cmd_couple(const Globals& g, const CoupleArgs& a) {
    int modes = a.identity + a.product + a.maximize + a.brute_force + !a.demands.empty();
    if (modes != 1) throw UsageError("choose exactly one of --identity, --brute-force, --product, --maximize, --demands");
    auto s = load(g, a.path);
    if (!s) return kInvalid;
    cbd::CouplingOptions opt = coupling_options(g);
    cbd::Json out;
    int code = kOk;
    if (a.product) {
        out = cbd::to_json(cbd::any_coupling(*s, opt));
    } else if (a.identity || a.brute_force) {
        cbd::FeasibilityResult r = a.identity ? cbd::identity_coupling_feasible(*s, opt) : cbd::brute_force_identity(*s);
        out = cbd::to_json(r);
        code = r.feasible() ? kOk : kNegative;
    } else if (a.maximize) {
        std::optional<cbd::TotalEqualityResult> total;
        try {
            total = cbd::max_total_connection_equality(*s, opt);
        } catch (const cbd::ArityError& e) {
            throw UsageError(e.what());
        }
        const auto& r = *total;
        out = cbd::Json{{"status", "feasible"},
                        {"optimum", cbd::to_string(r.optimum)},
                        {"sum_of_individual_maxima", cbd::to_string(r.sum_of_maxima)},
                        {"contextual", r.contextual},
                        {"witness", cbd::to_json(r.witness)}};
    } else {
        std::vector<cbd::Demand> demands;
        for (const auto& spec : a.demands)
            for (const auto& part : cbd::detail::split(spec, ';'))
                if (!part.empty()) demands.push_back(parse_demand(*s, part));
        cbd::FeasibilityResult r = cbd::constrained_coupling_feasible(*s, demands, opt);
        out = cbd::to_json(r);
        code = r.feasible() ? kOk : kNegative;
    }
    write_output(a.out, out.dump(2) + "\n");
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Contextuality analysis of systems of context-indexed random variables"};
    app.set_version_flag("--version", cbd::kToolVersion);
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--format", g.format, "Report format")->check(CLI::IsMember({"json", "text"}));
    app.add_option("--lp-var-cap", g.lp_var_cap, "Largest admissible number of LP variables");

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "Check a system file");
    validate->add_option("path", validate_path, "System JSON file ('-' for stdin)")->required();

    std::string analyze_path, witness, batch;
    bool skip_lp = false;
    auto* analyze = app.add_subcommand("analyze", "Run the full analysis on a system file");
    analyze->add_option("path", analyze_path, "System JSON file ('-' for stdin)");
    analyze->add_flag("--skip-lp", skip_lp, "Skip the LP-based coupling queries");
    analyze->add_option("--witness", witness, "Write witnesses/certificates to this file ('-' embeds them)");
    analyze->add_option("--batch", batch, "Analyze every .json file in a directory");

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "Write a canonical system");
    generate->add_option("kind", gen.kind, "singlet | prbox | deterministic | random")->required();
    generate->add_option("--angles", gen.angles, "Singlet angles 'a1,a2;b1,b2' (radians or 'p/q pi')");
    generate->add_option("--visibility", gen.visibility, "Singlet visibility in [0, 1]");
    generate->add_option("--precision", gen.precision, "Denominator bound for rounded correlations");
    generate->add_option("--seed", gen.seed, "Random seed");
    generate->add_option("--shape", gen.shape, "2x2 | cyclicN | mars | single");
    generate->add_option("--outcomes", gen.outcomes, "Outcomes per content");
    generate->add_option("--denominator", gen.denominator, "Denominator bound for random probabilities");
    generate->add_flag("--uniform", gen.uniform, "Uniform content marginals (random)");
    generate->add_option("--assignment", gen.assignment, "Deterministic outcomes, e.g. A1=+1,B2=-1");
    generate->add_option("--out", gen.out, "Output path ('-' for stdout)");

    CoupleArgs couple_args;
    auto* couple = app.add_subcommand("couple", "Answer one coupling query");
    couple->add_option("path", couple_args.path, "System JSON file ('-' for stdin)")->required();
    couple->add_flag("--identity", couple_args.identity, "Identity (Bell-type) coupling");
    couple->add_flag("--brute-force", couple_args.brute_force, "Identity coupling by vertex enumeration");
    couple->add_flag("--product", couple_args.product, "Product coupling");
    couple->add_flag("--maximize", couple_args.maximize, "Maximize the total of connection probabilities");
    couple->add_option("--demands", couple_args.demands, "content@ctx1~ctx2>=bound (';'-separated)");
    couple->add_option("--out", couple_args.out, "Output path ('-' for stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*validate) return cmd_validate(g, validate_path);
        if (*analyze) {
            if (!batch.empty()) return cmd_analyze_batch(g, batch, skip_lp);
            if (analyze_path.empty()) throw UsageError("analyze needs a path or --batch");
            return cmd_analyze(g, analyze_path, skip_lp, witness);
        }
        if (*generate) return cmd_generate(gen);
        if (*couple) return cmd_couple(g, couple_args);
    } catch (const cbd::SizeGuardError& e) {
        std::cerr << "size guard: " << e.what() << "\n";
        std::cout << cbd::Json{{"error", "size_guard"}, {"count", e.count().get_str()}, {"cap", e.cap().get_str()}}.dump(2)
                  << "\n";
        return kGuard;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const cbd::ArityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}
