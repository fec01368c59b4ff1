#pragma once

// The placement problem as a linear program, written out in CPLEX LP text
// format for external solvers, and an exhaustive chunk-grid search used as an
// independent check of the policies.
//
// A coverage constraint  sum_n min{x_{n,k}, R_n S_{m,n}} + d_{k,m} >= B  over
// the V distinct cells a path visits is equivalent to the 2^V linear rows
//   sum_{n not in A} x_{n,k} + d_{k,m} >= B - sum_{n in A} R_n S_{m,n}
// for every subset A of the visited cells.

#include "mcache/core.hpp"
#include "mcache/evaluator.hpp"
#include "mcache/mobility.hpp"

#include <cstdint>
#include <functional>

namespace mcache {

enum class Sense { less_equal, greater_equal };

struct Term {
    std::size_t var;
    double coef;
};

struct Constraint {
    std::string name;
    std::vector<Term> terms;
    Sense sense;
    double rhs;
};

struct Variable {
    std::string name;
    double lower = 0.0;
};

/// Minimization LP with nonnegative variables.
struct LinearProgram {
    std::vector<Variable> variables;
    std::vector<Term> objective;
    std::vector<Constraint> constraints;
    std::size_t capacity_rows = 0;
    std::size_t coverage_rows = 0;

    double objective_value(std::span<const double> values) const
    {
        detail::CompensatedSum s;
        for (const auto& t : objective)
            s += t.coef * values[t.var];
        return s.value();
    }

    /// True when every row and bound holds within `tol`.
    bool satisfied_by(std::span<const double> values, double tol) const
    {
        if (values.size() != variables.size())
            throw DimensionError("lp: assignment has the wrong number of values");
        for (std::size_t i = 0; i < variables.size(); ++i)
            if (values[i] < variables[i].lower - tol)
                return false;
        for (const auto& c : constraints) {
            detail::CompensatedSum lhs;
            for (const auto& t : c.terms)
                lhs += t.coef * values[t.var];
            const double v = lhs.value();
            if (c.sense == Sense::greater_equal ? v < c.rhs - tol : v > c.rhs + tol)
                return false;
        }
        return true;
    }
};

/// One visited cell of a path with its sojourn count.
struct CellVisit {
    std::size_t cell;
    int slots;
};

/// Distinct cells of a path, in order of first visit.
inline std::vector<CellVisit> visits_of(std::span<const std::uint32_t> path)
{
    std::vector<CellVisit> v;
    for (auto c : path) {
        auto it = std::find_if(v.begin(), v.end(), [&](const CellVisit& e) { return e.cell == c; });
        if (it == v.end())
            v.push_back({c, 1});
        else
            ++it->slots;
    }
    return v;
}

/// `x_cells` + d >= rhs, for one (file, path) pair.
struct CoverageRow {
    std::vector<std::size_t> x_cells;
    double rhs;
};

/// Rows are emitted for subsets A in binary counting order with the first
/// visited cell as the most significant bit, so A = {} comes first and the
/// all-constant row last. The all-constant row is dropped when its folded
/// right-hand side is nonpositive.
inline std::vector<CoverageRow> linearize_pair(std::span<const CellVisit> visits, const CellNetwork& network,
                                               double file_size)
{
    const std::size_t v = visits.size();
    if (v == 0)
        throw PreconditionError("linearize_pair: path visits no cell");
    if (v >= 31)
        throw BudgetError("linearize_pair: too many distinct cells on one path");
    std::vector<CoverageRow> rows;
    const std::uint32_t subsets = 1u << v;
    rows.reserve(subsets);
    for (std::uint32_t mask = 0; mask < subsets; ++mask) {
        CoverageRow row;
        detail::CompensatedSum folded;
        folded += file_size;
        for (std::size_t i = 0; i < v; ++i) {
            const bool constant = (mask >> (v - 1 - i)) & 1u;
            if (constant)
                folded += -network.rate(visits[i].cell) * visits[i].slots;
            else
                row.x_cells.push_back(visits[i].cell);
        }
        row.rhs = folded.value();
        if (row.x_cells.empty() && row.rhs <= 0.0)
            continue;
        rows.push_back(std::move(row));
    }
    return rows;
}

inline constexpr std::size_t kDefaultLpRowLimit = 10'000'000;

inline std::string x_name(std::size_t n, std::size_t k) { return "x_" + std::to_string(n + 1) + "_" + std::to_string(k + 1); }
inline std::string d_name(std::size_t k, std::size_t m) { return "d_" + std::to_string(k + 1) + "_" + std::to_string(m + 1); }

/// Variables are x_n_k (index n*K + k) followed by d_k_m (index N*K + k*M + m).
inline LinearProgram build_p2(const VideoLibrary& library, const CellNetwork& network, const PathEnsemble& ensemble,
                              std::size_t row_limit = kDefaultLpRowLimit)
{
    if (ensemble.kind() != EnsembleKind::exact)
        throw PreconditionError("build_p2: requires an exactly enumerated ensemble");
    if (ensemble.cell_count() != network.cell_count())
        throw DimensionError("build_p2: ensemble and network disagree on N");
    const std::size_t cells = network.cell_count();
    const std::size_t files = library.file_count();
    const std::size_t paths = ensemble.size();

    std::vector<std::vector<CellVisit>> visits(paths);
    std::size_t expected_rows = cells;
    for (std::size_t m = 0; m < paths; ++m) {
        visits[m] = visits_of(ensemble.path(m));
        const std::size_t per_pair = visits[m].size() >= 31 ? row_limit + 1 : (std::size_t{1} << visits[m].size());
        expected_rows += per_pair * files;
        if (expected_rows > row_limit)
            throw BudgetError("build_p2: linear program would exceed " + std::to_string(row_limit) + " rows");
    }

    LinearProgram lp;
    lp.variables.reserve(cells * files + files * paths);
    for (std::size_t n = 0; n < cells; ++n)
        for (std::size_t k = 0; k < files; ++k)
            lp.variables.push_back({x_name(n, k)});
    const std::size_t d_base = cells * files;
    for (std::size_t k = 0; k < files; ++k)
        for (std::size_t m = 0; m < paths; ++m)
            lp.variables.push_back({d_name(k, m)});

    for (std::size_t k = 0; k < files; ++k)
        for (std::size_t m = 0; m < paths; ++m)
            lp.objective.push_back({d_base + k * paths + m, ensemble.prob(m) * library.popularity(k)});

    for (std::size_t n = 0; n < cells; ++n) {
        Constraint c{"cap_" + std::to_string(n + 1), {}, Sense::less_equal, network.capacity(n)};
        for (std::size_t k = 0; k < files; ++k)
            c.terms.push_back({n * files + k, 1.0});
        lp.constraints.push_back(std::move(c));
    }
    lp.capacity_rows = cells;

    for (std::size_t k = 0; k < files; ++k) {
        for (std::size_t m = 0; m < paths; ++m) {
            const auto rows = linearize_pair(visits[m], network, library.file_size());
            for (std::size_t r = 0; r < rows.size(); ++r) {
                Constraint c{"cov_" + std::to_string(k + 1) + "_" + std::to_string(m + 1) + "_" + std::to_string(r + 1),
                             {},
                             Sense::greater_equal,
                             rows[r].rhs};
                for (auto n : rows[r].x_cells)
                    c.terms.push_back({n * files + k, 1.0});
                c.terms.push_back({d_base + k * paths + m, 1.0});
                lp.constraints.push_back(std::move(c));
                ++lp.coverage_rows;
            }
        }
    }
    return lp;
}

namespace detail {

inline void write_lp_terms(std::ostream& out, const LinearProgram& lp, std::span<const Term> terms)
{
    constexpr std::size_t per_line = 6;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        if (i > 0 && i % per_line == 0)
            out << "\n   ";
        const double c = terms[i].coef;
        if (i == 0)
            out << (c < 0 ? "- " : "");
        else
            out << (c < 0 ? " - " : " + ");
        const double a = std::abs(c);
        if (a != 1.0)
            out << format_real(a) << ' ';
        out << lp.variables[terms[i].var].name;
    }
}

} // namespace detail

/// CPLEX LP text. Output depends only on `lp`, so re-export is byte-identical.
inline void export_lp(const LinearProgram& lp, std::ostream& out)
{
    out << "\\ coded small-cell cache placement: expected MBS download\n";
    out << "Minimize\n obj: ";
    if (lp.objective.empty())
        out << "0 " << lp.variables.front().name;
    else
        detail::write_lp_terms(out, lp, lp.objective);
    out << "\nSubject To\n";
    for (const auto& c : lp.constraints) {
        out << ' ' << c.name << ": ";
        detail::write_lp_terms(out, lp, c.terms);
        out << (c.sense == Sense::less_equal ? " <= " : " >= ") << detail::format_real(c.rhs) << '\n';
    }
    out << "Bounds\n";
    for (const auto& v : lp.variables)
        out << ' ' << v.name << " >= " << detail::format_real(v.lower) << '\n';
    out << "End\n";
    if (!out)
        throw Error("export_lp: write failed");
}

inline void export_lp(const LinearProgram& lp, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("export_lp: cannot open '" + path + "' for writing");
    export_lp(lp, out);
    out.flush();
    if (!out)
        throw Error("export_lp: write to '" + path + "' failed");
}

// ---------------------------------------------------------------------------
// Brute-force chunk-grid oracle

enum class SearchMode {
    automatic, ///< per-cell when T <= t_min, joint otherwise
    joint,
    per_cell,
};

struct BruteForceOptions {
    /// Grid step in bits; 0 means min_n R_n.
    double chunk = 0.0;
    SearchMode mode = SearchMode::automatic;
    std::size_t max_candidates = 10'000'000;
};

struct BruteForceResult {
    CachingPolicy policy;
    double d_av;
    std::size_t candidates = 0;
};

namespace detail {

// Grid levels 0, chunk, 2 chunk, ... up to min(C_n, T R_n, B).
inline std::size_t grid_levels(const CellNetwork& network, const VideoLibrary& library, Deadline horizon,
                               std::size_t n, double chunk)
{
    const double top = std::min({network.capacity(n), horizon.slots() * network.rate(n), library.file_size()});
    return static_cast<std::size_t>(std::floor(top / chunk + kRelTol)) + 1;
}

inline double checked_power(std::size_t base, std::size_t exp, double limit)
{
    double v = 1.0;
    for (std::size_t i = 0; i < exp && v <= limit; ++i)
        v *= static_cast<double>(base);
    return v;
}

// Visits every level tuple (j_0..j_{K-1}) with sum j * chunk <= capacity in
// lexicographic order.
inline void for_each_tuple(std::size_t files, std::size_t levels, double chunk, double capacity, double tol,
                           const std::function<void(std::span<const std::size_t>)>& visit)
{
    std::vector<std::size_t> j(files, 0);
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t k, std::size_t used) {
        if (k == files) {
            visit(j);
            return;
        }
        for (std::size_t l = 0; l < levels; ++l) {
            if (static_cast<double>(used + l) * chunk > capacity + tol)
                break;
            j[k] = l;
            rec(k + 1, used + l);
        }
        j[k] = 0;
    };
    rec(0, 0);
}

} // namespace detail

/// Exhaustive search over x_{n,k} in {0, chunk, 2 chunk, ...} subject to the
/// cell capacities. Ties keep the lexicographically smallest placement.
inline BruteForceResult brute_force_optimal(const VideoLibrary& library, const CellNetwork& network,
                                            const PathEnsemble& ensemble, const BruteForceOptions& options = {})
{
    const std::size_t cells = network.cell_count();
    const std::size_t files = library.file_count();
    const double chunk = options.chunk > 0.0 ? options.chunk : network.min_rate();
    const double tol = library.tolerance();
    const double improve = 1e-12 * library.file_size();
    const Evaluator evaluator(ensemble, library, network);

    SearchMode mode = options.mode;
    if (mode == SearchMode::automatic)
        mode = ensemble.horizon().slots() <= t_min(library, network) + kRelTol ? SearchMode::per_cell
                                                                              : SearchMode::joint;

    std::vector<std::size_t> levels(cells);
    for (std::size_t n = 0; n < cells; ++n)
        levels[n] = detail::grid_levels(network, library, ensemble.horizon(), n, chunk);

    const double limit = static_cast<double>(options.max_candidates);
    double space = mode == SearchMode::joint ? 1.0 : 0.0;
    for (std::size_t n = 0; n < cells; ++n) {
        const double per_cell = detail::checked_power(levels[n], files, limit);
        space = mode == SearchMode::joint ? space * per_cell : space + per_cell;
        if (space > limit)
            throw BudgetError("brute_force_optimal: search space exceeds " + std::to_string(options.max_candidates) +
                              " candidate placements");
    }

    BruteForceResult result{CachingPolicy(cells, files), 0.0, 0};

    if (mode == SearchMode::per_cell) {
        // Separable objective: d_av = B - sum_n sum_k gain_{n,k}(x_{n,k}).
        for (std::size_t n = 0; n < cells; ++n) {
            std::vector<double> gain(files * levels[n]);
            CachingPolicy probe(cells, files);
            const double empty = evaluator.d_av(probe);
            for (std::size_t k = 0; k < files; ++k)
                for (std::size_t l = 0; l < levels[n]; ++l) {
                    probe(n, k) = static_cast<double>(l) * chunk;
                    gain[k * levels[n] + l] = empty - evaluator.d_av(probe);
                    probe(n, k) = 0.0;
                }
            std::vector<std::size_t> best;
            double best_gain = -1.0;
            detail::for_each_tuple(files, levels[n], chunk, network.capacity(n), tol,
                                   [&](std::span<const std::size_t> j) {
                                       ++result.candidates;
                                       detail::CompensatedSum g;
                                       for (std::size_t k = 0; k < files; ++k)
                                           g += gain[k * levels[n] + j[k]];
                                       if (best.empty() || g.value() > best_gain + improve) {
                                           best.assign(j.begin(), j.end());
                                           best_gain = g.value();
                                       }
                                   });
            for (std::size_t k = 0; k < files; ++k)
                result.policy(n, k) = static_cast<double>(best[k]) * chunk;
        }
        result.d_av = evaluator.d_av(result.policy);
        return result;
    }

    // Joint search: odometer over per-cell tuple lists.
    std::vector<std::vector<std::vector<std::size_t>>> tuples(cells);
    for (std::size_t n = 0; n < cells; ++n)
        detail::for_each_tuple(files, levels[n], chunk, network.capacity(n), tol,
                               [&](std::span<const std::size_t> j) { tuples[n].emplace_back(j.begin(), j.end()); });

    std::vector<std::size_t> pick(cells, 0);
    CachingPolicy candidate(cells, files);
    bool have_best = false;
    while (true) {
        for (std::size_t n = 0; n < cells; ++n)
            for (std::size_t k = 0; k < files; ++k)
                candidate(n, k) = static_cast<double>(tuples[n][pick[n]][k]) * chunk;
        const double d = evaluator.d_av(candidate);
        ++result.candidates;
        if (!have_best || d < result.d_av - improve) {
            result.policy = candidate;
            result.d_av = d;
            have_best = true;
        }
        std::size_t n = cells;
        while (n-- > 0) {
            if (++pick[n] < tuples[n].size())
                break;
            pick[n] = 0;
        }
        if (n == static_cast<std::size_t>(-1))
            break;
    }
    return result;
}

} // namespace mcache
