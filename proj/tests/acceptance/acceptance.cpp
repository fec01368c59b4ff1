// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include "mcache/experiment.hpp"
#include "mcache/lp_oracle.hpp"

#include "invariants.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sys/wait.h>

using namespace mcache;

namespace {

const std::string kCli = MCACHE_CLI_PATH;
const std::string kConfigs = MCACHE_CONFIG_DIR;

struct Outcome {
    bool pass = true;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) { return detail::format_real(v); }

// 1. gamma policy equals the exhaustive optimum below the threshold.
Outcome oracle_optimality()
{
    const auto start = Clock::now();
    std::mt19937_64 rng(20240601);
    const std::size_t instances = 60;
    const double chunk = 0.125;
    double worst = 0.0;
    std::size_t joint_runs = 0;
    for (std::size_t i = 0; i < instances; ++i) {
        const std::size_t cells = 1 + rng() % 3;
        const std::size_t files = 1 + rng() % 4;
        // dyadic rates keep every breakpoint on the search grid
        std::vector<double> rate(cells), cap(cells);
        for (std::size_t n = 0; n < cells; ++n) {
            rate[n] = rng() % 2 == 0 ? 0.25 : 0.125;
            cap[n] = chunk * static_cast<double>(rng() % 9);
        }
        const double r_max = *std::max_element(rate.begin(), rate.end());
        const int horizon = 1 + static_cast<int>(rng() % std::min<std::uint64_t>(3, static_cast<std::uint64_t>(1.0 / r_max)));
        const VideoLibrary lib(1.0, fixtures::random_popularity(rng, files));
        const CellNetwork net(rate, cap, fixtures::no_adjacency(cells));
        if (horizon > t_min(lib, net))
            return {false, "generator produced T > t_min"};
        const auto ens = enumerate_paths(fixtures::random_chain(rng, cells), Deadline(horizon));
        const Evaluator ev(ens, lib, net);
        const double gamma = ev.d_av(gamma_policy(lib, net, sojourn_ccdf(ens)));

        BruteForceResult best{CachingPolicy(cells, files), 0.0, 0};
        try {
            best = brute_force_optimal(lib, net, ens, {.chunk = chunk, .mode = SearchMode::joint, .max_candidates = 2'000'000});
            ++joint_runs;
        } catch (const BudgetError&) {
            best = brute_force_optimal(lib, net, ens, {.chunk = chunk, .mode = SearchMode::per_cell});
        }
        const double gap = std::abs(gamma - best.d_av);
        worst = std::max(worst, gap);
        if (gap > 1e-9 * lib.file_size())
            return {false, "instance " + std::to_string(i) + ": gamma " + fmt(gamma) + " vs optimum " + fmt(best.d_av)};
    }
    const double secs = seconds_since(start);
    if (secs >= 60.0)
        return {false, "took " + fmt(secs) + " s"};
    return {true, std::to_string(instances) + " instances (" + std::to_string(joint_runs) +
                      " searched jointly), max gap " + fmt(worst) + ", " + fmt(secs) + " s"};
}

// 2. The 2^V row set is equivalent to the max-form constraint.
Outcome linearization_equivalence()
{
    const auto start = Clock::now();
    // worked path {1,1,2,2} with R_1 = 1/8, R_2 = 1/16
    const CellNetwork six({0.125, 0.0625, 0.25, 0.25, 0.25, 0.25}, std::vector<double>(6, 1.0),
                          fixtures::no_adjacency(6));
    const auto rows = linearize_pair(visits_of(std::vector<std::uint32_t>{0, 0, 1, 1}), six, 1.0);
    const std::vector<CoverageRow> expected{{{0, 1}, 1.0}, {{0}, 1.0 - 2 * 0.0625}, {{1}, 1.0 - 2 * 0.125},
                                            {{}, 1.0 - 2 * 0.125 - 2 * 0.0625}};
    if (rows.size() != expected.size())
        return {false, "worked path gives " + std::to_string(rows.size()) + " rows"};
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (rows[i].x_cells != expected[i].x_cells || rows[i].rhs != expected[i].rhs)
            return {false, "worked path row " + std::to_string(i + 1) + " differs"};

    std::mt19937_64 rng(7);
    const std::size_t trials = 5000;
    std::size_t satisfied = 0;
    for (std::size_t trial = 0; trial < trials; ++trial) {
        const std::size_t cells = 1 + rng() % 4;
        const int horizon = 1 + static_cast<int>(rng() % 5);
        std::vector<double> rate(cells);
        for (auto& r : rate)
            r = 0.125 * static_cast<double>(1 + rng() % 4);
        const CellNetwork net(rate, std::vector<double>(cells, 4.0), fixtures::no_adjacency(cells));
        std::vector<std::uint32_t> path(static_cast<std::size_t>(horizon));
        for (auto& c : path)
            c = static_cast<std::uint32_t>(rng() % cells);
        const auto visits = visits_of(path);
        const auto lin = linearize_pair(visits, net, 1.0);
        std::vector<double> x(cells);
        for (auto& v : x)
            v = 0.0625 * static_cast<double>(rng() % 17);
        const double d = 0.0625 * static_cast<double>(rng() % 17);

        bool row_form = true;
        for (const auto& r : lin) {
            double lhs = d;
            for (auto c : r.x_cells)
                lhs += x[c];
            row_form = row_form && lhs >= r.rhs;
        }
        double collected = 0.0;
        for (const auto& v : visits)
            collected += std::min(x[v.cell], net.rate(v.cell) * v.slots);
        const bool max_form = d >= std::max(1.0 - collected, 0.0);
        if (row_form != max_form)
            return {false, "assignment " + std::to_string(trial) + " disagrees"};
        satisfied += max_form ? 1 : 0;
    }
    const double secs = seconds_since(start);
    if (secs >= 10.0)
        return {false, "took " + fmt(secs) + " s"};
    return {true, "worked rows exact; " + std::to_string(trials) + " assignments agree (" + std::to_string(satisfied) +
                      " feasible), " + fmt(secs) + " s"};
}

// 3. Greedy never loses to its seed on the desk-scale sweep, and wins somewhere.
Outcome greedy_dominance()
{
    const auto start = Clock::now();
    auto s = preset_scenario("fig1a", PresetScale::small);
    s.policies = {PolicyKind::gamma_at_tmin, PolicyKind::greedy};
    const auto rows = run_scenario(s);
    std::size_t strict = 0;
    std::string trace;
    for (std::size_t i = 0; i + 1 < rows.size(); i += 2) {
        const double seed = rows[i].d_av_norm, greedy = rows[i + 1].d_av_norm;
        if (greedy > seed + 1e-9)
            return {false, "cache " + fmt(rows[i].value) + ": greedy " + fmt(greedy) + " > seed " + fmt(seed)};
        strict += greedy < seed - 1e-9 ? 1 : 0;
        trace += " " + fmt(rows[i].value) + ":" + fmt(seed - greedy);
    }
    const double secs = seconds_since(start);
    if (strict == 0)
        return {false, "no strict improvement at any point"};
    if (secs >= 120.0)
        return {false, "took " + fmt(secs) + " s"};
    return {true, "strict at " + std::to_string(strict) + "/5 points, improvement" + trace + ", " + fmt(secs) + " s"};
}

// 4. A fixed placement only gets better with a longer deadline.
Outcome deadline_monotonicity()
{
    const auto s = preset_scenario("fig1b", PresetScale::small);
    const auto lib = make_library(s.library);
    const auto net = make_network(s, base_point(s, lib));
    const auto model = make_mobility(s);
    const auto seed = gamma_policy(lib, net, sojourn_ccdf(enumerate_paths(model, t_min_slots(lib, net))));
    double prev = std::numeric_limits<double>::infinity();
    std::string trace;
    for (int t = 2; t <= 6; ++t) {
        const double d = evaluate(seed, enumerate_paths(model, Deadline(t)), lib, net).d_av;
        if (d > prev + 1e-9 * lib.file_size())
            return {false, "T=" + std::to_string(t) + " d_av " + fmt(d) + " > " + fmt(prev)};
        trace += " " + fmt(d);
        prev = d;
    }
    return {true, "d_av over T=2..6:" + trace};
}

// 5. Whole-file caching everywhere makes d_av linear in T below the threshold.
Outcome most_popular_linearity()
{
    auto s = preset_scenario("fig1b", PresetScale::small);
    s.network.t_min = 6;
    const auto lib = make_library(s.library);
    const auto net = make_network(s, base_point(s, lib));
    const auto model = make_mobility(s);
    const auto x = most_popular_policy(lib, net);
    const double b = lib.file_size();
    const double rate = net.rate(0);
    const auto cached = static_cast<std::size_t>(std::floor(net.capacity(0) / b + kRelTol));
    double worst = 0.0;
    for (int t = 1; t <= 6; ++t) {
        const double measured = evaluate(x, enumerate_paths(model, Deadline(t)), lib, net).d_av;
        double closed = 0.0;
        for (std::size_t k = 0; k < lib.file_count(); ++k)
            closed += lib.popularity(k) * (k < cached ? b - t * rate : b);
        worst = std::max(worst, std::abs(measured - closed));
        if (std::abs(measured - closed) > 1e-9 * b)
            return {false, "T=" + std::to_string(t) + ": measured " + fmt(measured) + " vs " + fmt(closed)};
    }
    return {true, "T=1..6 with " + std::to_string(cached) + " cached files, max deviation " + fmt(worst)};
}

// 6. Sampled evaluation agrees with the exact one within three standard errors.
Outcome monte_carlo_consistency()
{
    auto s = preset_scenario("fig1a", PresetScale::small);
    s.network.cache_fraction = 0.3;
    const auto lib = make_library(s.library);
    const auto net = make_network(s, base_point(s, lib));
    const auto model = make_mobility(s);
    const Deadline horizon(s.deadline);
    const auto exact = enumerate_paths(model, horizon);
    const std::size_t count = 100'000;
    const auto sampled = sample_paths(model, horizon, count, 12345);
    const Evaluator exact_ev(exact, lib, net);
    const Evaluator sampled_ev(sampled, lib, net);

    const auto seed = gamma_policy(lib, net, sojourn_ccdf(enumerate_paths(model, t_min_slots(lib, net))));
    const std::vector<std::pair<std::string, CachingPolicy>> policies{
        {"gamma", gamma_policy(lib, net, sojourn_ccdf(exact))},
        {"greedy", greedy_reallocate(seed, exact_ev).policy},
        {"most_popular", most_popular_policy(lib, net)}};
    std::string trace;
    bool pass = true;
    for (const auto& [name, x] : policies) {
        const auto report = exact_ev.evaluate(x, {.per_path = true});
        double second = 0.0;
        for (std::size_t m = 0; m < exact.size(); ++m)
            second += exact.prob(m) * report.per_path[m] * report.per_path[m];
        const double var = std::max(second - report.d_av * report.d_av, 0.0);
        // The additive 1e-12 B only absorbs summation rounding; it matters
        // when every path contributes the same amount and the variance is 0.
        const double bound = 3.0 * std::sqrt(var / static_cast<double>(count)) + 1e-12 * lib.file_size();
        const double diff = std::abs(sampled_ev.d_av(x) - report.d_av);
        pass = pass && diff <= bound;
        trace += " " + name + " |diff| " + fmt(diff) + " <= " + fmt(bound) + (diff <= bound ? ";" : " FAILS;");
    }
    return {pass, trace};
}

// 7. Full-scale cache sweep: greedy's edge over gamma grows, most-popular is worst.
Outcome full_scale_trend()
{
    const auto start = Clock::now();
    auto s = preset_scenario("fig1a", PresetScale::full);
    s.policies = {PolicyKind::gamma, PolicyKind::gamma_at_tmin, PolicyKind::greedy, PolicyKind::most_popular};
    const auto rows = run_scenario(s);
    std::map<double, std::map<PolicyKind, double>> table;
    for (const auto& r : rows)
        table[r.value][r.policy] = r.d_av_norm;
    std::string trace;
    double prev_gap = -std::numeric_limits<double>::infinity();
    Outcome out;
    for (const auto& [value, scores] : table) {
        const double gap = scores.at(PolicyKind::gamma) - scores.at(PolicyKind::greedy);
        trace += " " + fmt(value) + ": gamma " + fmt(scores.at(PolicyKind::gamma)) + " greedy " +
                 fmt(scores.at(PolicyKind::greedy)) + " popular " + fmt(scores.at(PolicyKind::most_popular)) + ";";
        if (!(gap > 0.0)) {
            out.pass = false;
            out.detail += " gap not positive at " + fmt(value) + ";";
        }
        if (gap < prev_gap - 1e-12) {
            out.pass = false;
            out.detail += " gap shrinks at " + fmt(value) + ";";
        }
        prev_gap = gap;
        for (const auto& [kind, d] : scores)
            if (kind != PolicyKind::most_popular && !(scores.at(PolicyKind::most_popular) > d)) {
                out.pass = false;
                out.detail += " most_popular not strictly worst at " + fmt(value) + ";";
                break;
            }
    }
    const double secs = seconds_since(start);
    if (secs >= 900.0) {
        out.pass = false;
        out.detail += " took " + fmt(secs) + " s;";
    }
    out.detail += trace + " " + fmt(secs) + " s";
    return out;
}

struct Captured {
    int status;
    std::string out;
};

Captured capture(const std::string& args)
{
    const std::string cmd = kCli + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe)
        return {-1, {}};
    std::string out;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0)
        out.append(buf, n);
    const int raw = pclose(pipe);
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, out};
}

// 8. Every CLI command is byte-deterministic.
Outcome cli_determinism()
{
    const auto dir = std::filesystem::temp_directory_path() / "mcache_acceptance";
    std::filesystem::create_directories(dir);
    const std::string tiny = "--config " + kConfigs + "/tiny_oracle.ini";
    const std::string policy = (dir / "gamma.csv").string();
    {
        const auto solved = capture("solve " + tiny + " --policy gamma --out " + policy);
        if (solved.status != 0)
            return {false, "solve failed: " + solved.out};
    }
    const std::vector<std::string> commands{
        "paths " + tiny,
        "paths --config " + kConfigs + "/sampled_tiny.ini --seed 99",
        "solve " + tiny + " --policy gamma",
        "solve " + tiny + " --policy greedy",
        "solve " + tiny + " --policy popular",
        "solve --config " + kConfigs + "/sampled_tiny.ini --policy greedy --seed 3",
        "evaluate " + tiny + " --policy-file " + policy,
        "sweep --preset fig1a --scale small",
        "sweep --config " + kConfigs + "/sampled_tiny.ini --seed 5",
        "export-lp " + tiny,
        "oracle " + tiny,
    };
    for (const auto& c : commands) {
        const auto a = capture(c), b = capture(c);
        if (a.status != 0)
            return {false, "'" + c + "' exited with " + std::to_string(a.status) + ": " + a.out.substr(0, 200)};
        if (a.out != b.out || a.status != b.status)
            return {false, "'" + c + "' output differs between runs"};
    }
    return {true, std::to_string(commands.size()) + " commands byte-identical across two runs"};
}

// 9. Randomized invariant suites.
Outcome invariant_suites()
{
    const std::vector<std::pair<std::string, fixtures::SuiteResult>> suites{
        {"probability", fixtures::probability_conservation(901)},
        {"sojourn", fixtures::sojourn_conservation(902)},
        {"ccdf", fixtures::ccdf_monotonicity(903)},
        {"gamma", fixtures::gamma_double_monotonicity(904)},
        {"feasibility", fixtures::constructor_feasibility(905)},
    };
    Outcome out;
    for (const auto& [name, r] : suites) {
        out.detail += " " + name + " " + std::to_string(r.cases) + " cases/" + std::to_string(r.failures) + " failures;";
        if (!r.ok() || r.cases < fixtures::kSuiteCases) {
            out.pass = false;
            out.detail += " (" + r.first_failure + ")";
        }
    }
    return out;
}

} // namespace

int main()
{
    const std::vector<std::pair<std::string, Outcome (*)()>> criteria{
        {"1 oracle optimality", oracle_optimality},
        {"2 linearization equivalence", linearization_equivalence},
        {"3 greedy dominance", greedy_dominance},
        {"4 deadline monotonicity", deadline_monotonicity},
        {"5 most-popular linearity", most_popular_linearity},
        {"6 monte carlo consistency", monte_carlo_consistency},
        {"7 full-scale cache sweep trend", full_scale_trend},
        {"8 cli determinism", cli_determinism},
        {"9 invariant suites", invariant_suites},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::cout << (o.pass ? "PASS" : "FAIL") << "  " << name << " --" << o.detail << std::endl;
        failed += o.pass ? 0 : 1;
    }
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
    return failed == 0 ? 0 : 1;
}
