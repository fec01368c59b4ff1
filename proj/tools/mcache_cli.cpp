// mcache: command-line driver for coded small-cell cache placement.
//
//   mcache paths      --config F [--T n] [--out F]
//   mcache solve      --config F --policy gamma|greedy|popular [--T n] [--out F]
//   mcache evaluate   --config F --policy-file P [--T n] [--out F]
//   mcache sweep      --config F [--out F] [--timing]
//   mcache export-lp  --config F [--T n] [--out F]
//   mcache oracle     --config F [--chunk b] [--mode auto|joint|per_cell] [--out F]
//
// --preset fig1a|fig1b|fig1c [--scale small|full] may replace --config.
// Exit codes: 0 ok, 1 other failure, 2 config error, 3 budget exceeded.

#include "mcache/evaluator.hpp"
#include "mcache/experiment.hpp"
#include "mcache/lp_oracle.hpp"
#include "mcache/mobility.hpp"
#include "mcache/policies.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitBudget = 3;

struct CommonArgs {
    std::string config;
    std::string preset;
    std::string scale = "small";
    std::optional<std::uint64_t> seed;
    std::optional<int> deadline;
    std::string out;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_deadline = true)
{
    auto* cfg = cmd->add_option("--config", args.config, "scenario config file")->check(CLI::ExistingFile);
    auto* pre = cmd->add_option("--preset", args.preset, "built-in scenario: fig1a, fig1b or fig1c");
    cfg->excludes(pre);
    cmd->add_option("--scale", args.scale, "preset scale")->check(CLI::IsMember({"small", "full"}));
    cmd->add_option("--seed", args.seed, "override mobility.seed");
    if (with_deadline)
        cmd->add_option("--T", args.deadline, "override the deadline in slots")->check(CLI::PositiveNumber);
    cmd->add_option("--out", args.out, "output file (default: stdout)");
}

mcache::Scenario load(const CommonArgs& args)
{
    if (args.config.empty() && args.preset.empty())
        throw mcache::ConfigError("config", "either --config or --preset is required");
    mcache::Scenario s = args.config.empty()
                             ? mcache::preset_scenario(args.preset, args.scale == "full" ? mcache::PresetScale::full
                                                                                          : mcache::PresetScale::small)
                             : mcache::load_scenario(args.config);
    if (args.seed)
        s.mobility.seed = *args.seed;
    if (args.deadline)
        s.deadline = *args.deadline;
    mcache::validate_scenario(s);
    return s;
}

/// Model pieces at the scenario's base point (sweeps are ignored).
struct Instance {
    mcache::Scenario scenario;
    mcache::VideoLibrary library;
    mcache::CellNetwork network;
    mcache::MobilityModel mobility;
    mcache::Deadline deadline;
};

Instance instantiate(const CommonArgs& args)
{
    auto s = load(args);
    auto library = mcache::make_library(s.library);
    const auto point = mcache::base_point(s, library);
    auto network = mcache::make_network(s, point);
    auto mobility = mcache::make_mobility(s);
    const mcache::Deadline deadline(point.deadline);
    return {std::move(s), std::move(library), std::move(network), std::move(mobility), deadline};
}

template <class Write>
void emit(const std::string& path, Write&& write)
{
    if (path.empty()) {
        write(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw mcache::Error("cannot open '" + path + "' for writing");
    write(out);
    out.flush();
    if (!out)
        throw mcache::Error("write to '" + path + "' failed");
}

int run_paths(const CommonArgs& args)
{
    const auto inst = instantiate(args);
    const auto ensemble = mcache::make_ensemble(inst.scenario, inst.mobility, inst.deadline);
    emit(args.out, [&](std::ostream& out) { mcache::write_ensemble_csv(out, ensemble); });
    return 0;
}

int run_solve(const CommonArgs& args, const std::string& policy_name)
{
    const auto inst = instantiate(args);
    const auto kind = mcache::parse_policy_kind(policy_name, "--policy");
    mcache::EnsembleCache ensembles(inst.scenario);
    const mcache::Evaluator evaluator(ensembles.get(inst.deadline), inst.library, inst.network);
    const auto policy = mcache::build_policy(kind, inst.library, inst.network, inst.deadline, ensembles, evaluator);
    emit(args.out, [&](std::ostream& out) { mcache::write_policy_csv(out, policy); });
    return 0;
}

int run_evaluate(const CommonArgs& args, const std::string& policy_file, std::string name)
{
    const auto inst = instantiate(args);
    const auto policy = mcache::read_policy_csv(policy_file);
    const auto verdict = mcache::validate_policy(policy, inst.network, inst.library);
    if (!verdict) {
        std::ostringstream msg;
        msg << "policy is infeasible:";
        for (const auto& o : verdict.overflows)
            msg << " cell " << (o.cell + 1) << " over capacity by " << mcache::detail::format_real(o.overshoot) << ';';
        for (const auto& e : verdict.negatives)
            msg << " x_" << (e.cell + 1) << '_' << (e.file + 1) << " negative;";
        throw mcache::Error(msg.str());
    }
    const auto ensemble = mcache::make_ensemble(inst.scenario, inst.mobility, inst.deadline);
    const double d = mcache::evaluate(policy, ensemble, inst.library, inst.network).d_av / inst.library.file_size();
    if (name.empty())
        name = std::filesystem::path(policy_file).stem().string();
    emit(args.out, [&](std::ostream& out) {
        out << "scenario,policy,d_av_norm\n"
            << inst.scenario.id << ',' << name << ',' << mcache::detail::format_real(d) << '\n';
    });
    return 0;
}

int run_sweep(const CommonArgs& args, bool timing)
{
    const auto scenario = load(args);
    const auto rows = mcache::run_scenario(scenario, {timing});
    const std::string path = args.out.empty() ? scenario.output : args.out;
    emit(path, [&](std::ostream& out) { mcache::write_sweep_csv(out, rows); });
    return 0;
}

int run_export_lp(const CommonArgs& args)
{
    const auto inst = instantiate(args);
    if (inst.scenario.mobility.ensemble != mcache::EnsembleKind::exact)
        throw mcache::ConfigError("mobility.ensemble", "export-lp needs an exact ensemble");
    const auto ensemble = mcache::make_ensemble(inst.scenario, inst.mobility, inst.deadline);
    const auto lp = mcache::build_p2(inst.library, inst.network, ensemble);
    emit(args.out, [&](std::ostream& out) { mcache::export_lp(lp, out); });
    return 0;
}

int run_oracle(const CommonArgs& args, double chunk, const std::string& mode)
{
    const auto inst = instantiate(args);
    const auto ensemble = mcache::make_ensemble(inst.scenario, inst.mobility, inst.deadline);
    mcache::BruteForceOptions options;
    options.chunk = chunk;
    options.mode = mode == "joint"      ? mcache::SearchMode::joint
                   : mode == "per_cell" ? mcache::SearchMode::per_cell
                                        : mcache::SearchMode::automatic;
    const auto result = mcache::brute_force_optimal(inst.library, inst.network, ensemble, options);
    emit(args.out, [&](std::ostream& out) { mcache::write_policy_csv(out, result.policy); });
    std::cerr << "oracle: d_av_norm=" << mcache::detail::format_real(result.d_av / inst.library.file_size())
              << " candidates=" << result.candidates << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Coded small-cell cache placement under user mobility"};
    app.require_subcommand(1);

    CommonArgs paths_args, solve_args, eval_args, sweep_args, lp_args, oracle_args;
    std::string policy_name, policy_file, eval_name, oracle_mode = "auto";
    double oracle_chunk = 0.0;
    bool timing = false;

    auto* paths = app.add_subcommand("paths", "write the mobility path ensemble as CSV");
    add_common(paths, paths_args);

    auto* solve = app.add_subcommand("solve", "build a placement and write it as CSV");
    add_common(solve, solve_args);
    solve->add_option("--policy", policy_name, "placement policy")
        ->required()
        ->check(CLI::IsMember({"gamma", "gamma_at_tmin", "greedy", "popular", "most_popular"}));

    auto* evaluate = app.add_subcommand("evaluate", "score a placement CSV against a scenario");
    add_common(evaluate, eval_args);
    evaluate->add_option("--policy-file", policy_file, "placement CSV")->required();
    evaluate->add_option("--name", eval_name, "policy label in the output (default: file stem)");

    auto* sweep = app.add_subcommand("sweep", "run the scenario's sweep and write the results CSV");
    add_common(sweep, sweep_args, false);
    sweep->add_flag("--timing", timing, "record wall-clock time per row (breaks byte-identical output)");

    auto* export_lp = app.add_subcommand("export-lp", "write the placement LP in CPLEX LP format");
    add_common(export_lp, lp_args);

    auto* oracle = app.add_subcommand("oracle", "exhaustive chunk-grid search on a small scenario");
    add_common(oracle, oracle_args);
    oracle->add_option("--chunk", oracle_chunk, "grid step in bits (default: smallest rate)");
    oracle->add_option("--mode", oracle_mode, "search mode")->check(CLI::IsMember({"auto", "joint", "per_cell"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (*paths)
            return run_paths(paths_args);
        if (*solve)
            return run_solve(solve_args, policy_name);
        if (*evaluate)
            return run_evaluate(eval_args, policy_file, eval_name);
        if (*sweep)
            return run_sweep(sweep_args, timing);
        if (*export_lp)
            return run_export_lp(lp_args);
        if (*oracle)
            return run_oracle(oracle_args, oracle_chunk, oracle_mode);
    } catch (const mcache::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const mcache::ModelError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const mcache::BudgetError& e) {
        std::cerr << "budget exceeded: " << e.what() << '\n';
        return kExitBudget;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitFailure;
}
