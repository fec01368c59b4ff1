#pragma once

// Scenario configuration and parameter sweeps over cache size, deadline and
// rate, producing one CSV row per (sweep point, policy).
//
// Config files are INI-style with sections [scenario], [library], [network],
// [mobility], [deadline], [sweep] and [output]. See configs/ for examples and
// README.md for the full key list.

#include "mcache/core.hpp"
#include "mcache/evaluator.hpp"
#include "mcache/mobility.hpp"
#include "mcache/policies.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <chrono>
#include <fstream>
#include <map>
#include <memory>
#include <set>

namespace mcache {

/// Invalid scenario configuration; `field` names the offending key.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& message)
        : Error(field + ": " + message), field_(std::move(field))
    {
    }
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

inline constexpr int kSchemaVersion = 1;

enum class SweepAxis { none, cache_fraction, cache_files, deadline, t_min, rate };

enum class PolicyKind { gamma, gamma_at_tmin, greedy, most_popular };

inline std::string to_string(SweepAxis a)
{
    switch (a) {
    case SweepAxis::none: return "none";
    case SweepAxis::cache_fraction: return "cache_fraction";
    case SweepAxis::cache_files: return "cache_files";
    case SweepAxis::deadline: return "T";
    case SweepAxis::t_min: return "t_min";
    case SweepAxis::rate: return "rate";
    }
    return "none";
}

inline std::string to_string(PolicyKind p)
{
    switch (p) {
    case PolicyKind::gamma: return "gamma";
    case PolicyKind::gamma_at_tmin: return "gamma_at_tmin";
    case PolicyKind::greedy: return "greedy";
    case PolicyKind::most_popular: return "most_popular";
    }
    return "gamma";
}

inline PolicyKind parse_policy_kind(std::string_view s, const std::string& field)
{
    if (s == "gamma")
        return PolicyKind::gamma;
    if (s == "gamma_at_tmin")
        return PolicyKind::gamma_at_tmin;
    if (s == "greedy")
        return PolicyKind::greedy;
    if (s == "most_popular" || s == "popular")
        return PolicyKind::most_popular;
    throw ConfigError(field, "unknown policy '" + std::string(s) + "'");
}

struct LibrarySpec {
    std::size_t files = 0;
    double file_size = 1.0;
    std::optional<double> zipf;
    std::vector<double> popularity;
};

enum class InitialKind { uniform, stationary, cell };

struct NetworkSpec {
    std::size_t width = 0;
    std::size_t height = 0;
    double stay = 0.3;
    std::vector<std::pair<std::size_t, double>> stay_overrides; ///< 1-based cell, f_n
    std::optional<double> rate;                                  ///< bits per slot
    std::optional<double> t_min;                                 ///< rate = B / t_min
    std::optional<double> cache_files;                           ///< capacity in files
    std::optional<double> cache_fraction;                        ///< capacity as a share of the library
};

struct MobilitySpec {
    InitialKind initial = InitialKind::uniform;
    std::size_t initial_cell = 0; ///< 0-based, for InitialKind::cell
    EnsembleKind ensemble = EnsembleKind::exact;
    std::size_t samples = 100'000;
    std::uint64_t seed = 1;
    std::size_t budget = kDefaultPathSlotBudget;
};

struct SweepSpec {
    SweepAxis axis = SweepAxis::none;
    std::vector<double> values;
};

struct Scenario {
    int schema_version = kSchemaVersion;
    std::string id = "scenario";
    LibrarySpec library;
    NetworkSpec network;
    MobilitySpec mobility;
    int deadline = 1;
    SweepSpec sweep;
    std::vector<PolicyKind> policies{PolicyKind::gamma, PolicyKind::gamma_at_tmin, PolicyKind::greedy,
                                     PolicyKind::most_popular};
    std::string output;
};

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

inline std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    for (auto f : split_csv_line(s))
        if (!f.empty())
            out.emplace_back(f);
    return out;
}

inline double config_real(const std::string& value, const std::string& field)
{
    try {
        return parse_real(value, field);
    } catch (const Error&) {
        throw ConfigError(field, "expected a number, got '" + value + "'");
    }
}

inline long long config_integer(const std::string& value, const std::string& field)
{
    long long v = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || ptr != value.data() + value.size())
        throw ConfigError(field, "expected an integer, got '" + value + "'");
    return v;
}

inline std::vector<double> config_reals(const std::string& value, const std::string& field)
{
    std::vector<double> out;
    for (const auto& f : split_list(value))
        out.push_back(config_real(f, field));
    return out;
}

class ConfigReader {
public:
    explicit ConfigReader(const boost::property_tree::ptree& tree) : tree_(tree) {}

    std::optional<std::string> get(const std::string& section, const std::string& key)
    {
        seen_.insert(section + "." + key);
        auto sec = tree_.get_child_optional(section);
        if (!sec)
            return std::nullopt;
        auto v = sec->get_optional<std::string>(boost::property_tree::ptree::path_type(key, '\0'));
        if (!v)
            return std::nullopt;
        return *v;
    }

    std::string require(const std::string& section, const std::string& key)
    {
        auto v = get(section, key);
        if (!v)
            throw ConfigError(section + "." + key, "required key is missing");
        return *v;
    }

    void reject_unknown() const
    {
        static const std::set<std::string> sections{"scenario", "library",  "network", "mobility",
                                                    "deadline", "sweep", "output"};
        for (const auto& [section, body] : tree_) {
            if (!sections.count(section))
                throw ConfigError(section, "unknown section");
            for (const auto& [key, value] : body)
                if (!seen_.count(section + "." + key))
                    throw ConfigError(section + "." + key, "unknown key");
        }
    }

private:
    const boost::property_tree::ptree& tree_;
    std::set<std::string> seen_;
};

} // namespace detail

/// Cross-field checks. Throws ConfigError naming the field at fault.
inline void validate_scenario(const Scenario& s)
{
    if (s.schema_version != kSchemaVersion)
        throw ConfigError("scenario.schema_version", "unsupported version " + std::to_string(s.schema_version));
    const auto& lib = s.library;
    if (lib.popularity.empty()) {
        if (lib.files == 0)
            throw ConfigError("library.files", "must be a positive integer");
        if (!lib.zipf)
            throw ConfigError("library.zipf", "either zipf or popularity is required");
        if (*lib.zipf < 0)
            throw ConfigError("library.zipf", "must be nonnegative");
    } else if (lib.files != 0 && lib.files != lib.popularity.size()) {
        throw ConfigError("library.popularity", "length differs from library.files");
    }
    if (!(lib.file_size > 0))
        throw ConfigError("library.file_size", "must be positive");
    const auto& net = s.network;
    if (net.width == 0 || net.height == 0)
        throw ConfigError("network.grid", "width and height must be positive");
    if (!(net.stay >= 0 && net.stay <= 1))
        throw ConfigError("network.stay", "must lie in [0,1]");
    for (const auto& [cell, f] : net.stay_overrides) {
        if (cell == 0 || cell > net.width * net.height)
            throw ConfigError("network.stay_overrides", "cell " + std::to_string(cell) + " is outside the grid");
        if (!(f >= 0 && f <= 1))
            throw ConfigError("network.stay_overrides", "probability must lie in [0,1]");
    }
    if (net.rate.has_value() == net.t_min.has_value())
        throw ConfigError("network.rate", "exactly one of rate and t_min must be given");
    if (net.rate && !(*net.rate > 0))
        throw ConfigError("network.rate", "must be positive");
    if (net.t_min && !(*net.t_min > 0))
        throw ConfigError("network.t_min", "must be positive");
    if (net.cache_files.has_value() == net.cache_fraction.has_value())
        throw ConfigError("network.cache_files", "exactly one of cache_files and cache_fraction must be given");
    if (net.cache_files && !(*net.cache_files >= 0))
        throw ConfigError("network.cache_files", "must be nonnegative");
    if (net.cache_fraction && !(*net.cache_fraction >= 0))
        throw ConfigError("network.cache_fraction", "must be nonnegative");
    if (s.mobility.initial == InitialKind::cell && s.mobility.initial_cell >= net.width * net.height)
        throw ConfigError("mobility.initial", "start cell is outside the grid");
    if (s.mobility.ensemble == EnsembleKind::sampled && s.mobility.samples == 0)
        throw ConfigError("mobility.samples", "must be at least 1");
    if (s.deadline < 1)
        throw ConfigError("deadline.T", "must be at least 1");
    if (s.sweep.axis != SweepAxis::none) {
        const std::string field = "sweep.values";
        if (s.sweep.values.empty())
            throw ConfigError(field, "sweep axis needs at least one value");
        for (std::size_t i = 1; i < s.sweep.values.size(); ++i)
            if (!(s.sweep.values[i] > s.sweep.values[i - 1]))
                throw ConfigError(field, "values must be strictly increasing");
        for (double v : s.sweep.values) {
            if (!(v > 0) && s.sweep.axis != SweepAxis::cache_fraction && s.sweep.axis != SweepAxis::cache_files)
                throw ConfigError(field, "values must be positive");
            if (v < 0)
                throw ConfigError(field, "values must be nonnegative");
            if (s.sweep.axis == SweepAxis::deadline && v != std::floor(v))
                throw ConfigError(field, "deadline values must be whole slots");
        }
    }
    if (s.policies.empty())
        throw ConfigError("sweep.policies", "at least one policy is required");
}

inline Scenario parse_scenario(std::istream& in)
{
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError("config", "line " + std::to_string(e.line()) + ": " + e.message());
    }
    detail::ConfigReader r(tree);
    Scenario s;

    const auto version = r.get("scenario", "schema_version");
    if (!version)
        throw ConfigError("scenario.schema_version", "required key is missing");
    s.schema_version = static_cast<int>(detail::config_integer(*version, "scenario.schema_version"));
    if (auto v = r.get("scenario", "id"))
        s.id = *v;

    if (auto v = r.get("library", "files")) {
        const auto files = detail::config_integer(*v, "library.files");
        if (files <= 0)
            throw ConfigError("library.files", "must be a positive integer");
        s.library.files = static_cast<std::size_t>(files);
    }
    if (auto v = r.get("library", "file_size"))
        s.library.file_size = detail::config_real(*v, "library.file_size");
    if (auto v = r.get("library", "zipf"))
        s.library.zipf = detail::config_real(*v, "library.zipf");
    if (auto v = r.get("library", "popularity"))
        s.library.popularity = detail::config_reals(*v, "library.popularity");

    {
        const auto w = detail::config_integer(r.require("network", "width"), "network.width");
        const auto h = detail::config_integer(r.require("network", "height"), "network.height");
        if (w <= 0)
            throw ConfigError("network.width", "must be a positive integer");
        if (h <= 0)
            throw ConfigError("network.height", "must be a positive integer");
        s.network.width = static_cast<std::size_t>(w);
        s.network.height = static_cast<std::size_t>(h);
    }
    if (auto v = r.get("network", "stay"))
        s.network.stay = detail::config_real(*v, "network.stay");
    if (auto v = r.get("network", "stay_overrides")) {
        for (const auto& item : detail::split_list(*v)) {
            const auto colon = item.find(':');
            if (colon == std::string::npos)
                throw ConfigError("network.stay_overrides", "entries must look like cell:probability");
            const auto cell = detail::config_integer(item.substr(0, colon), "network.stay_overrides");
            if (cell <= 0)
                throw ConfigError("network.stay_overrides", "cell indices are 1-based");
            s.network.stay_overrides.emplace_back(static_cast<std::size_t>(cell),
                                                  detail::config_real(item.substr(colon + 1), "network.stay_overrides"));
        }
    }
    if (auto v = r.get("network", "rate"))
        s.network.rate = detail::config_real(*v, "network.rate");
    if (auto v = r.get("network", "t_min"))
        s.network.t_min = detail::config_real(*v, "network.t_min");
    if (auto v = r.get("network", "cache_files"))
        s.network.cache_files = detail::config_real(*v, "network.cache_files");
    if (auto v = r.get("network", "cache_fraction"))
        s.network.cache_fraction = detail::config_real(*v, "network.cache_fraction");

    if (auto v = r.get("mobility", "initial")) {
        if (*v == "uniform")
            s.mobility.initial = InitialKind::uniform;
        else if (*v == "stationary")
            s.mobility.initial = InitialKind::stationary;
        else if (v->rfind("cell:", 0) == 0) {
            const auto c = detail::config_integer(v->substr(5), "mobility.initial");
            if (c <= 0)
                throw ConfigError("mobility.initial", "cell indices are 1-based");
            s.mobility.initial = InitialKind::cell;
            s.mobility.initial_cell = static_cast<std::size_t>(c - 1);
        } else
            throw ConfigError("mobility.initial", "expected uniform, stationary or cell:<n>");
    }
    if (auto v = r.get("mobility", "ensemble")) {
        if (*v == "exact")
            s.mobility.ensemble = EnsembleKind::exact;
        else if (*v == "sampled")
            s.mobility.ensemble = EnsembleKind::sampled;
        else
            throw ConfigError("mobility.ensemble", "expected exact or sampled");
    }
    if (auto v = r.get("mobility", "samples")) {
        const auto c = detail::config_integer(*v, "mobility.samples");
        if (c <= 0)
            throw ConfigError("mobility.samples", "must be at least 1");
        s.mobility.samples = static_cast<std::size_t>(c);
    }
    if (auto v = r.get("mobility", "seed")) {
        const auto c = detail::config_integer(*v, "mobility.seed");
        if (c < 0)
            throw ConfigError("mobility.seed", "must be nonnegative");
        s.mobility.seed = static_cast<std::uint64_t>(c);
    }
    if (auto v = r.get("mobility", "budget")) {
        const auto c = detail::config_integer(*v, "mobility.budget");
        if (c <= 0)
            throw ConfigError("mobility.budget", "must be positive");
        s.mobility.budget = static_cast<std::size_t>(c);
    }

    s.deadline = static_cast<int>(detail::config_integer(r.require("deadline", "T"), "deadline.T"));

    if (auto v = r.get("sweep", "axis")) {
        static const std::map<std::string, SweepAxis> axes{
            {"none", SweepAxis::none},   {"cache_fraction", SweepAxis::cache_fraction},
            {"cache_files", SweepAxis::cache_files}, {"T", SweepAxis::deadline},
            {"t_min", SweepAxis::t_min}, {"rate", SweepAxis::rate}};
        auto it = axes.find(*v);
        if (it == axes.end())
            throw ConfigError("sweep.axis", "unknown axis '" + *v + "'");
        s.sweep.axis = it->second;
    }
    if (auto v = r.get("sweep", "values"))
        s.sweep.values = detail::config_reals(*v, "sweep.values");
    if (auto v = r.get("sweep", "policies")) {
        s.policies.clear();
        for (const auto& p : detail::split_list(*v))
            s.policies.push_back(parse_policy_kind(p, "sweep.policies"));
    }
    if (auto v = r.get("output", "path"))
        s.output = *v;

    r.reject_unknown();
    validate_scenario(s);
    return s;
}

inline Scenario load_scenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("config", "cannot open '" + path + "'");
    return parse_scenario(in);
}

// ---------------------------------------------------------------------------
// Presets

enum class PresetScale { small, full };

/// Built-in scenarios for the three reference sweeps. The full scale is
/// a 4x4 grid with K = 1000; the small scale a 2x2 grid with K = 100.
inline Scenario preset_scenario(const std::string& name, PresetScale scale)
{
    Scenario s;
    s.id = name + (scale == PresetScale::small ? "-small" : "");
    s.library.files = scale == PresetScale::small ? 100 : 1000;
    s.library.zipf = 0.56;
    if (scale == PresetScale::small) {
        s.network.width = 2;
        s.network.height = 2;
        s.network.stay_overrides = {{4, 0.4}};
    } else {
        s.network.width = 4;
        s.network.height = 4;
        s.network.stay_overrides = {{4, 0.4}, {13, 0.4}, {7, 0.5}, {9, 0.5}};
    }
    s.network.stay = 0.3;
    const double files = static_cast<double>(s.library.files);
    if (name == "fig1a") {
        s.network.t_min = 2;
        s.deadline = 5;
        s.network.cache_fraction = 0.1;
        s.sweep = {SweepAxis::cache_fraction, {0.1, 0.2, 0.3, 0.4, 0.5}};
    } else if (name == "fig1b") {
        s.network.t_min = 2;
        s.network.cache_files = 0.3 * files;
        s.deadline = 2;
        s.sweep = {SweepAxis::deadline, {2, 3, 4, 5, 6}};
    } else if (name == "fig1c") {
        s.network.t_min = 2;
        s.network.cache_files = 0.3 * files;
        s.deadline = 5;
        s.sweep = {SweepAxis::t_min, {2, 3, 4, 5, 6}};
    } else {
        throw ConfigError("preset", "unknown preset '" + name + "' (expected fig1a, fig1b or fig1c)");
    }
    validate_scenario(s);
    return s;
}

// ---------------------------------------------------------------------------
// Building the model pieces

inline VideoLibrary make_library(const LibrarySpec& spec)
{
    if (!spec.popularity.empty())
        return VideoLibrary(spec.file_size, spec.popularity);
    return VideoLibrary::zipf(spec.files, *spec.zipf, spec.file_size);
}

/// Resolved sweep point: everything that can vary along an axis.
struct ScenarioPoint {
    double cache_bits = 0.0;
    double rate = 0.0;
    int deadline = 1;
};

inline ScenarioPoint base_point(const Scenario& s, const VideoLibrary& library)
{
    ScenarioPoint p;
    const double b = library.file_size();
    p.rate = s.network.rate ? *s.network.rate : b / *s.network.t_min;
    p.cache_bits = s.network.cache_files ? *s.network.cache_files * b
                                         : *s.network.cache_fraction * static_cast<double>(library.file_count()) * b;
    p.deadline = s.deadline;
    return p;
}

inline ScenarioPoint sweep_point(const Scenario& s, const VideoLibrary& library, double value)
{
    ScenarioPoint p = base_point(s, library);
    const double b = library.file_size();
    switch (s.sweep.axis) {
    case SweepAxis::none: break;
    case SweepAxis::cache_fraction: p.cache_bits = value * static_cast<double>(library.file_count()) * b; break;
    case SweepAxis::cache_files: p.cache_bits = value * b; break;
    case SweepAxis::deadline: p.deadline = static_cast<int>(value); break;
    case SweepAxis::t_min: p.rate = b / value; break;
    case SweepAxis::rate: p.rate = value; break;
    }
    return p;
}

inline CellNetwork make_network(const Scenario& s, const ScenarioPoint& point)
{
    return CellNetwork::grid(s.network.width, s.network.height, point.rate, point.cache_bits);
}

inline MobilityModel make_mobility(const Scenario& s)
{
    const std::size_t n = s.network.width * s.network.height;
    std::vector<double> stay(n, s.network.stay);
    for (const auto& [cell, f] : s.network.stay_overrides)
        stay[cell - 1] = f;
    auto model = build_grid_mobility(s.network.width, s.network.height, stay);
    switch (s.mobility.initial) {
    case InitialKind::uniform: return model;
    case InitialKind::stationary: return model.with_initial(stationary_distribution(model));
    case InitialKind::cell: return model.with_initial(point_mass(n, s.mobility.initial_cell));
    }
    return model;
}

inline PathEnsemble make_ensemble(const Scenario& s, const MobilityModel& model, Deadline horizon)
{
    if (s.mobility.ensemble == EnsembleKind::sampled)
        return sample_paths(model, horizon, s.mobility.samples, s.mobility.seed);
    try {
        return enumerate_paths(model, horizon, s.mobility.budget);
    } catch (const BudgetError& e) {
        throw BudgetError(std::string(e.what()) + " (set mobility.ensemble = sampled in the config)");
    }
}

// ---------------------------------------------------------------------------
// Running

struct SweepRow {
    std::string axis;
    double value = 0.0;
    PolicyKind policy = PolicyKind::gamma;
    int deadline = 1;
    double t_min = 0.0;
    double d_av_norm = 0.0;
    double wall_ms = 0.0;
};

struct RunOptions {
    bool timing = false; ///< record wall-clock time; otherwise wall_ms is 0
};

/// Lazily built ensembles keyed by deadline; mobility does not depend on the
/// other sweep axes.
class EnsembleCache {
public:
    EnsembleCache(const Scenario& s) : scenario_(s), model_(make_mobility(s)) {}

    const PathEnsemble& get(Deadline horizon)
    {
        auto it = cache_.find(horizon.slots());
        if (it == cache_.end())
            it = cache_.emplace(horizon.slots(), std::make_unique<PathEnsemble>(make_ensemble(scenario_, model_, horizon)))
                     .first;
        return *it->second;
    }

    const MobilityModel& model() const noexcept { return model_; }

private:
    const Scenario& scenario_;
    MobilityModel model_;
    std::map<int, std::unique_ptr<PathEnsemble>> cache_;
};

/// Builds the named placement for one sweep point. The greedy policy is
/// seeded with the gamma policy at min(T, floor(t_min)).
inline CachingPolicy build_policy(PolicyKind kind, const VideoLibrary& library, const CellNetwork& network,
                                  Deadline deadline, EnsembleCache& ensembles, const Evaluator& evaluator)
{
    const Deadline at_tmin = t_min_slots(library, network);
    switch (kind) {
    case PolicyKind::gamma: return gamma_policy(library, network, sojourn_ccdf(ensembles.get(deadline)));
    case PolicyKind::gamma_at_tmin: return gamma_policy(library, network, sojourn_ccdf(ensembles.get(at_tmin)));
    case PolicyKind::greedy: {
        const Deadline seed_horizon(std::min(deadline.slots(), at_tmin.slots()));
        const auto seed = gamma_policy(library, network, sojourn_ccdf(ensembles.get(seed_horizon)));
        return greedy_reallocate(seed, evaluator).policy;
    }
    case PolicyKind::most_popular: return most_popular_policy(library, network);
    }
    throw Error("unknown policy kind");
}

inline std::vector<SweepRow> run_scenario(const Scenario& scenario, const RunOptions& options = {})
{
    validate_scenario(scenario);
    const VideoLibrary library = make_library(scenario.library);
    EnsembleCache ensembles(scenario);

    std::vector<double> values = scenario.sweep.values;
    if (scenario.sweep.axis == SweepAxis::none)
        values = {0.0};

    std::vector<SweepRow> rows;
    for (double value : values) {
        const ScenarioPoint point = sweep_point(scenario, library, value);
        const CellNetwork network = make_network(scenario, point);
        const Deadline deadline(point.deadline);
        const Evaluator evaluator(ensembles.get(deadline), library, network);

        std::map<PolicyKind, double> scores;
        for (PolicyKind kind : scenario.policies) {
            const auto start = std::chrono::steady_clock::now();
            const CachingPolicy policy = build_policy(kind, library, network, deadline, ensembles, evaluator);
            if (!validate_policy(policy, network, library))
                throw Error("policy " + to_string(kind) + " produced an infeasible placement");
            const double d = evaluator.d_av(policy) / library.file_size();
            const auto stop = std::chrono::steady_clock::now();
            if (!(d >= -kRelTol && d <= 1.0 + kRelTol))
                throw Error("normalized d_av outside [0,1] for policy " + to_string(kind));
            scores[kind] = d;
            SweepRow row;
            row.axis = to_string(scenario.sweep.axis);
            row.value = value;
            row.policy = kind;
            row.deadline = point.deadline;
            row.t_min = t_min(library, network);
            row.d_av_norm = d;
            row.wall_ms = options.timing ? std::chrono::duration<double, std::milli>(stop - start).count() : 0.0;
            rows.push_back(row);
        }

        // Post-hoc construction guarantee: greedy never loses to its seed family.
        if (scores.count(PolicyKind::greedy)) {
            double reference;
            if (scores.count(PolicyKind::gamma_at_tmin))
                reference = scores[PolicyKind::gamma_at_tmin];
            else
                reference = evaluator.d_av(build_policy(PolicyKind::gamma_at_tmin, library, network, deadline,
                                                        ensembles, evaluator)) /
                            library.file_size();
            if (scores[PolicyKind::greedy] > reference + kRelTol)
                throw Error("greedy placement is worse than gamma_at_tmin at sweep value " +
                            detail::format_real(value));
        }
    }
    return rows;
}

inline void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows)
{
    out << "sweep_axis,sweep_value,policy,T,T_min,d_av_norm,wall_ms\n";
    for (const auto& r : rows)
        out << r.axis << ',' << detail::format_real(r.value) << ',' << to_string(r.policy) << ',' << r.deadline << ','
            << detail::format_real(r.t_min) << ',' << detail::format_real(r.d_av_norm) << ','
            << detail::format_real(r.wall_ms) << '\n';
}

} // namespace mcache
