#include "cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "pags/error.hpp"
#include "pags/logic.hpp"
#include "pags/model.hpp"
#include "pags/oracle.hpp"
#include "pags/prob.hpp"
#include "pags/sim.hpp"

namespace pags::cli {

namespace {

enum Exit { Positive = 0, Negative = 1, Undecided = 2, Usage = 3 };

struct Outcome
{
    std::string result;
    std::optional<bool> certified;
    std::string witness;
    std::optional<unsigned> bound;
    std::string mode;
    int code = Positive;
};

void print(const Outcome& o, bool json, std::ostream& out)
{
    if (json) {
        nlohmann::ordered_json j;
        j["result"] = o.result;
        j["certified"] = o.certified ? nlohmann::ordered_json(*o.certified) : nlohmann::ordered_json(nullptr);
        j["witness"] = o.witness;
        j["bound"] = o.bound ? nlohmann::ordered_json(*o.bound) : nlohmann::ordered_json(nullptr);
        j["mode"] = o.mode;
        out << j.dump() << "\n";
        return;
    }
    out << "result: " << o.result << "\n";
    out << "certified: " << (o.certified ? (*o.certified ? "true" : "false") : "-") << "\n";
    out << "witness: " << (o.witness.empty() ? "-" : o.witness) << "\n";
    out << "bound: " << (o.bound ? std::to_string(*o.bound) : "-") << "\n";
    out << "mode: " << o.mode << "\n";
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot read " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

GameStructure load_model(const std::string& path)
{
    return parse_model(read_file(path));
}

Outcome verdict_outcome(const EvalResult& r, const std::string& mode)
{
    Outcome o;
    o.result = to_string(r.verdict);
    o.certified = r.certified;
    o.witness = r.witness.empty() ? r.message : r.witness;
    o.bound = r.bound_used;
    o.mode = mode;
    o.code = r.verdict == Verdict::Holds ? Positive : r.verdict == Verdict::Fails ? Negative : Undecided;
    return o;
}

std::string format_witness(const WeightWitness& w, const StateTable& names)
{
    std::string out;
    for (const auto& [pair, weight] : w.weights) {
        out += out.empty() ? "" : ", ";
        out += "w(" + names.name(pair.first) + "," + names.name(pair.second) + ")=" + weight.to_string();
    }
    return out;
}

std::string format_pairs(const Relation& r, const StateTable& names)
{
    std::string out;
    for (const auto& [s, t] : r) {
        out += out.empty() ? "" : " ";
        out += "(" + names.name(s) + "," + names.name(t) + ")";
    }
    return out.empty() ? "{}" : out;
}

std::string format_lottery(const ActionLottery& l, const SymbolTable<ActionId>& acts)
{
    std::string out = "[";
    for (std::uint32_t a = 0; a < l.size(); ++a)
        if (!l[a].is_zero())
            out += (out.size() > 1 ? "," : "") + acts.name(ActionId{a}) + ":" + l[a].to_string();
    return out + "]";
}

std::pair<StateId, StateId> parse_pair(const GameStructure& g, const std::string& text)
{
    const auto comma = text.find(',');
    if (comma == std::string::npos)
        throw PreconditionError("expected --pair s,t");
    return {state_named(g, text.substr(0, comma)), state_named(g, text.substr(comma + 1))};
}

struct LiftArgs
{
    std::string model, relation, delta, theta;
};

void add_lift_options(CLI::App* cmd, LiftArgs& a)
{
    cmd->add_option("--model", a.model, "model file (.pgs)")->required();
    cmd->add_option("--relation", a.relation, "relation file, one pair per line")->required();
    cmd->add_option("--delta", a.delta, "left distribution, e.g. s1:1/2,s2:1/2")->required();
    cmd->add_option("--theta", a.theta, "right distribution")->required();
}

struct LiftInput
{
    StateTable names;
    Relation r;
    Distribution d, th;
};

// State names outside the model are accepted and interned, so a relation may
// range over a second, unmodelled state space.
LiftInput lift_input(const LiftArgs& a)
{
    LiftInput in{load_model(a.model).states(), {}, {}, {}};
    in.r = parse_relation(read_file(a.relation), in.names, true);
    in.d = parse_distribution(a.delta, in.names, true);
    in.th = parse_distribution(a.theta, in.names, true);
    return in;
}

struct FormulaArgs
{
    std::string inline_text, file;
};

FormulaPtr formula_from(const FormulaArgs& a)
{
    if (a.inline_text.empty() == a.file.empty())
        throw PreconditionError("give exactly one of --formula and --formula-file");
    return parse_formula(a.inline_text.empty() ? read_file(a.file) : a.inline_text);
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"probabilistic alternating simulation and distribution logic toolkit", "pags"};
    app.require_subcommand(1);
    app.fallthrough();
    bool json = false;
    app.add_flag("--json", json, "machine-readable output");

    LiftArgs lift_args;
    auto* lift = app.add_subcommand("lift", "decide a lifting and print a weight function");
    add_lift_options(lift, lift_args);

    std::string model, mode = "pure", pair;
    bool trace = false;
    auto* sim = app.add_subcommand("sim", "PA-simulation");
    sim->add_option("--model", model)->required();
    sim->add_option("--mode", mode, "pure | grid=K | smt=DIR");
    sim->add_option("--pair", pair, "report a single pair s,t");
    sim->add_flag("--trace", trace, "list the relation after every refinement round");

    auto* asim = app.add_subcommand("asim", "alternating simulation of a deterministic model");
    asim->add_option("--model", model)->required();

    std::string dist;
    FormulaArgs formula;
    EvalOptions opts;
    opts.certify = false;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a formula at a distribution");
    eval_cmd->add_option("--model", model)->required();
    eval_cmd->add_option("--dist", dist)->required();
    auto* inline_opt = eval_cmd->add_option("--formula", formula.inline_text);
    eval_cmd->add_option("--formula-file", formula.file)->excludes(inline_opt);
    eval_cmd->add_option("--unfold", opts.unfold_bound, "fixpoint unfolding bound m");
    eval_cmd->add_option("--grid", opts.pi1_grid, "player-1 lottery grid K");
    eval_cmd->add_option("--split-denom", opts.split_denominator, "split denominator Q");
    eval_cmd->add_flag("--certify", opts.certify, "report certification");

    std::string state, from, to;
    unsigned depth = 0;
    unsigned grid = 2;
    auto* charform = app.add_subcommand("charform", "print a characteristic formula");
    charform->add_option("--model", model)->required();
    charform->add_option("--state", state)->required();
    charform->add_option("--depth", depth)->required();
    charform->add_option("--grid", grid);

    auto* preorder = app.add_subcommand("preorder", "logic preorder via characteristic formulas");
    preorder->add_option("--model", model)->required();
    preorder->add_option("--from", from)->required();
    preorder->add_option("--to", to)->required();
    preorder->add_option("--depth", depth)->required();
    preorder->add_option("--grid", grid);

    auto* oracle = app.add_subcommand("oracle", "brute-force reference implementations");
    oracle->require_subcommand(1);
    oracle->fallthrough();
    LiftArgs olift_args;
    auto* olift = oracle->add_subcommand("lift", "lifting by max-flow");
    add_lift_options(olift, olift_args);
    auto* osim = oracle->add_subcommand("sim", "grid-enumerated simulation");
    osim->add_option("--model", model)->required();
    osim->add_option("--grid", grid);
    osim->add_option("--pair", pair);
    OracleGrids grids;
    auto* oeval = oracle->add_subcommand("eval", "grid-enumerated evaluation");
    oeval->add_option("--model", model)->required();
    oeval->add_option("--dist", dist)->required();
    auto* oinline = oeval->add_option("--formula", formula.inline_text);
    oeval->add_option("--formula-file", formula.file)->excludes(oinline);
    oeval->add_option("--unfold", grids.unfold);
    oeval->add_option("--grid", grids.pi1);
    oeval->add_option("--grid2", grids.pi2);
    oeval->add_option("--split-denom", grids.split);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return Positive;
        }
        err << "error: " << e.what() << "\n";
        return Usage;
    }

    try {
        Outcome o;
        if (lift->parsed() || olift->parsed()) {
            const bool brute = olift->parsed();
            LiftInput in = lift_input(brute ? olift_args : lift_args);
            o.mode = brute ? "oracle-lift" : "lift";
            bool feasible = false;
            if (brute) {
                feasible = brute_lift(in.d, in.th, in.r);
            } else if (auto w = lift_check(in.d, in.th, in.r)) {
                feasible = true;
                o.witness = format_witness(*w, in.names);
            }
            o.result = feasible ? "feasible" : "infeasible";
            o.certified = true;
            o.code = feasible ? Positive : Negative;
        } else if (sim->parsed()) {
            const GameStructure g = load_model(model);
            const QuantStrategy strat = QuantStrategy::parse(mode);
            o.mode = "sim " + strat.to_string();
            Relation current = initial_relation(g);
            RefineOutcome last;
            unsigned rounds = 0;
            std::string log;
            while (true) {
                last = refine_step(g, current, strat);
                ++rounds;
                if (trace)
                    log += "round " + std::to_string(rounds) + ": " + format_pairs(last.relation, g.states()) + "; ";
                const bool stable = last.relation == current;
                current = last.relation;
                if (stable)
                    break;
            }
            o.bound = rounds;
            if (!pair.empty()) {
                const auto [s, t] = parse_pair(g, pair);
                if (last.deferred.contains({s, t})) {
                    o.result = "deferred";
                    o.code = Undecided;
                    const std::string file = g.states().name(s) + "_" + g.states().name(t) + ".smt2";
                    o.witness = log + "query written to " + (strat.directory / file).string();
                } else if (current.contains(s, t)) {
                    o.result = "related";
                    // Only the tested player-1 lotteries were checked.
                    o.certified = false;
                    o.witness = log;
                    for (const auto& w : last.witnesses[{s, t}]) {
                        o.witness += "pi1 " + format_lottery(w.pi1, g.actions(Player::One)) + " answered by " +
                                     format_lottery(w.pi2, g.actions(Player::One)) + "; ";
                    }
                    o.code = Positive;
                } else {
                    o.result = "unrelated";
                    o.certified = true;
                    o.witness = log;
                    o.code = Negative;
                }
                if (!o.witness.empty() && o.witness.ends_with("; "))
                    o.witness.resize(o.witness.size() - 2);
            } else {
                const bool deferred = !last.deferred.empty();
                o.result = deferred ? "deferred" : "computed";
                o.code = deferred ? Undecided : Positive;
                o.witness = log + (deferred ? "queries written to " + strat.directory.string()
                                            : format_pairs(current, g.states()));
            }
        } else if (asim->parsed()) {
            const GameStructure g = load_model(model);
            o.mode = "asim";
            o.result = "computed";
            o.certified = true;
            o.witness = format_pairs(a_simulation(g), g.states());
        } else if (eval_cmd->parsed()) {
            const GameStructure g = load_model(model);
            const FormulaPtr phi = formula_from(formula);
            o = verdict_outcome(eval(g, parse_distribution(dist, g.states()), phi, opts), "eval");
        } else if (charform->parsed()) {
            const GameStructure g = load_model(model);
            o.mode = "charform";
            o.result = "formula";
            o.witness = to_string(char_formula_state(g, state_named(g, state), depth, grid));
            o.bound = depth;
        } else if (preorder->parsed()) {
            const GameStructure g = load_model(model);
            o = verdict_outcome(logic_preorder(g, state_named(g, from), state_named(g, to), depth, grid), "preorder");
        } else if (osim->parsed()) {
            const GameStructure g = load_model(model);
            const Relation r = brute_sim(g, grid);
            o.mode = "oracle-sim grid=" + std::to_string(grid);
            if (!pair.empty()) {
                const auto [s, t] = parse_pair(g, pair);
                o.result = r.contains(s, t) ? "related" : "unrelated";
                o.code = r.contains(s, t) ? Positive : Negative;
            } else {
                o.result = "computed";
                o.witness = format_pairs(r, g.states());
            }
        } else if (oeval->parsed()) {
            const GameStructure g = load_model(model);
            const FormulaPtr phi = formula_from(formula);
            o = verdict_outcome(brute_eval(g, parse_distribution(dist, g.states()), phi, grids), "oracle-eval");
        }
        print(o, json, out);
        return o.code;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return Usage;
    }
}

} // namespace pags::cli
