#pragma once

// Markov mobility over small cells, length-T mobility paths and their
// sojourn statistics.

#include "mcache/core.hpp"
#include "mcache/detail/numeric.hpp"

#include <cstdint>
#include <optional>
#include <random>

namespace mcache {

/// Row-stochastic transition matrix plus the distribution of the cell a user
/// occupies when the request is issued.
class MobilityModel {
public:
    MobilityModel(std::size_t cells, std::vector<double> transition, std::vector<double> initial)
        : cells_(cells), transition_(std::move(transition)), initial_(std::move(initial))
    {
        if (cells_ == 0)
            throw ModelError("mobility: at least one cell is required");
        if (transition_.size() != cells_ * cells_)
            throw DimensionError("mobility: transition matrix must be N x N");
        if (initial_.size() != cells_)
            throw DimensionError("mobility: initial distribution must have N entries");
        for (std::size_t i = 0; i < cells_; ++i) {
            detail::CompensatedSum row;
            for (std::size_t j = 0; j < cells_; ++j) {
                const double v = transition_[i * cells_ + j];
                if (!(v >= 0.0 && v <= 1.0))
                    throw ModelError("mobility: transition entry (" + std::to_string(i + 1) + "," +
                                     std::to_string(j + 1) + ") outside [0,1]");
                row += v;
            }
            if (std::abs(row.value() - 1.0) > 1e-9)
                throw ModelError("mobility: row " + std::to_string(i + 1) + " of the transition matrix sums to " +
                                 detail::format_real(row.value()));
        }
        detail::CompensatedSum init;
        for (double v : initial_) {
            if (!(v >= 0.0 && v <= 1.0))
                throw ModelError("mobility: initial probability outside [0,1]");
            init += v;
        }
        if (std::abs(init.value() - 1.0) > 1e-9)
            throw ModelError("mobility: initial distribution sums to " + detail::format_real(init.value()));
    }

    std::size_t cell_count() const noexcept { return cells_; }
    double transition(std::size_t from, std::size_t to) const noexcept { return transition_[from * cells_ + to]; }
    double initial(std::size_t n) const noexcept { return initial_[n]; }
    std::span<const double> transition_matrix() const noexcept { return transition_; }
    std::span<const double> initial_distribution() const noexcept { return initial_; }

    MobilityModel with_initial(std::vector<double> initial) const
    {
        return MobilityModel(cells_, transition_, std::move(initial));
    }

private:
    std::size_t cells_;
    std::vector<double> transition_;
    std::vector<double> initial_;
};

/// Grid random walk: stay in cell n with probability stay[n], otherwise move
/// to one of the 4-neighbours uniformly. Boundary cells split the residual
/// mass over the neighbours they have. Initial distribution is uniform.
inline MobilityModel build_grid_mobility(std::size_t width, std::size_t height, std::span<const double> stay)
{
    const std::size_t n = width * height;
    if (n == 0)
        throw ModelError("mobility: grid must contain at least one cell");
    if (stay.size() != n)
        throw DimensionError("mobility: need one stay probability per grid cell");
    const auto adj = grid_adjacency(width, height);
    std::vector<double> p(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double f = stay[i];
        if (!(f >= 0.0 && f <= 1.0))
            throw ModelError("mobility: stay probability of cell " + std::to_string(i + 1) + " outside [0,1]");
        std::size_t degree = 0;
        for (std::size_t j = 0; j < n; ++j)
            degree += adj[i * n + j] ? 1 : 0;
        p[i * n + i] = f;
        if (degree == 0) {
            if (f < 1.0)
                throw ModelError("mobility: cell " + std::to_string(i + 1) +
                                 " has no neighbours but stay probability below 1");
            continue;
        }
        const double move = (1.0 - f) / static_cast<double>(degree);
        for (std::size_t j = 0; j < n; ++j)
            if (adj[i * n + j])
                p[i * n + j] = move;
    }
    return MobilityModel(n, std::move(p), std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

/// Stationary distribution, by power iteration on the lazy chain (P + I) / 2
/// which shares it and is aperiodic.
inline std::vector<double> stationary_distribution(const MobilityModel& model, int max_iterations = 100000,
                                                   double tolerance = 1e-14)
{
    const std::size_t n = model.cell_count();
    std::vector<double> pi(n, 1.0 / static_cast<double>(n));
    std::vector<double> next(n);
    for (int it = 0; it < max_iterations; ++it) {
        for (std::size_t j = 0; j < n; ++j) {
            detail::CompensatedSum s;
            for (std::size_t i = 0; i < n; ++i)
                s += pi[i] * model.transition(i, j);
            next[j] = 0.5 * (s.value() + pi[j]);
        }
        double total = 0.0;
        for (double v : next)
            total += v;
        double diff = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            next[j] /= total;
            diff = std::max(diff, std::abs(next[j] - pi[j]));
        }
        pi.swap(next);
        if (diff < tolerance)
            break;
    }
    return pi;
}

inline std::vector<double> point_mass(std::size_t cells, std::size_t cell)
{
    if (cell >= cells)
        throw ModelError("mobility: point-mass cell index out of range");
    std::vector<double> v(cells, 0.0);
    v[cell] = 1.0;
    return v;
}

// ---------------------------------------------------------------------------
// PathEnsemble

enum class EnsembleKind { exact, sampled };

/// Mobility paths I_m with probabilities q_m and sojourn counts S_{m,n}.
/// Exact ensembles are in lexicographic path order; sampled ones in draw order.
class PathEnsemble {
public:
    PathEnsemble(std::size_t cells, Deadline horizon, std::vector<std::uint32_t> paths, std::vector<double> prob,
                 EnsembleKind kind, std::uint64_t seed = 0)
        : cells_(cells), horizon_(horizon), paths_(std::move(paths)), prob_(std::move(prob)), kind_(kind), seed_(seed)
    {
        const auto t = static_cast<std::size_t>(horizon_.slots());
        if (paths_.size() != prob_.size() * t)
            throw DimensionError("ensemble: path storage does not match M x T");
        sojourn_.assign(prob_.size() * cells_, 0);
        for (std::size_t m = 0; m < prob_.size(); ++m)
            for (std::size_t i = 0; i < t; ++i) {
                const auto c = paths_[m * t + i];
                if (c >= cells_)
                    throw DimensionError("ensemble: path visits a cell outside the network");
                ++sojourn_[m * cells_ + c];
            }
    }

    std::size_t size() const noexcept { return prob_.size(); }
    std::size_t cell_count() const noexcept { return cells_; }
    Deadline horizon() const noexcept { return horizon_; }
    EnsembleKind kind() const noexcept { return kind_; }
    std::uint64_t seed() const noexcept { return seed_; }

    std::span<const std::uint32_t> path(std::size_t m) const
    {
        const auto t = static_cast<std::size_t>(horizon_.slots());
        return {paths_.data() + m * t, t};
    }
    double prob(std::size_t m) const noexcept { return prob_[m]; }
    std::span<const double> probs() const noexcept { return prob_; }
    std::span<const int> sojourn(std::size_t m) const { return {sojourn_.data() + m * cells_, cells_}; }

private:
    std::size_t cells_;
    Deadline horizon_;
    std::vector<std::uint32_t> paths_;
    std::vector<double> prob_;
    std::vector<int> sojourn_;
    EnsembleKind kind_;
    std::uint64_t seed_;
};

/// Default cap on M * T for exhaustive enumeration.
inline constexpr std::size_t kDefaultPathSlotBudget = 5'000'000;

/// All length-T paths with positive probability, in lexicographic order.
/// Throws BudgetError once M * T would exceed `path_slot_budget`.
inline PathEnsemble enumerate_paths(const MobilityModel& model, Deadline horizon,
                                    std::size_t path_slot_budget = kDefaultPathSlotBudget)
{
    const std::size_t n = model.cell_count();
    const auto t = static_cast<std::size_t>(horizon.slots());

    std::vector<std::vector<std::uint32_t>> successors(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (model.transition(i, j) > 0.0)
                successors[i].push_back(static_cast<std::uint32_t>(j));

    std::vector<std::uint32_t> paths;
    std::vector<double> prob;
    std::vector<std::uint32_t> current(t);
    std::vector<double> prefix(t);
    // next successor slot to try at each depth
    std::vector<std::size_t> cursor(t, 0);

    for (std::uint32_t start = 0; start < n; ++start) {
        if (model.initial(start) <= 0.0)
            continue;
        current[0] = start;
        prefix[0] = model.initial(start);
        std::size_t depth = 1;
        if (t > 1)
            cursor[1] = 0;
        while (true) {
            if (depth == t) {
                if ((prob.size() + 1) * t > path_slot_budget)
                    throw BudgetError("path enumeration exceeds the budget of " + std::to_string(path_slot_budget) +
                                      " path-slots; use sample_paths instead");
                paths.insert(paths.end(), current.begin(), current.end());
                prob.push_back(prefix[t - 1]);
                --depth;
                if (depth == 0)
                    break;
                continue;
            }
            const auto& succ = successors[current[depth - 1]];
            if (cursor[depth] == succ.size()) {
                --depth;
                if (depth == 0)
                    break;
                continue;
            }
            const auto next = succ[cursor[depth]++];
            current[depth] = next;
            prefix[depth] = prefix[depth - 1] * model.transition(current[depth - 1], next);
            ++depth;
            if (depth < t)
                cursor[depth] = 0;
        }
    }
    return PathEnsemble(n, horizon, std::move(paths), std::move(prob), EnsembleKind::exact);
}

namespace detail {

inline std::uint32_t draw_index(std::span<const double> weights, double u)
{
    double acc = 0.0;
    std::uint32_t last_positive = 0;
    for (std::size_t j = 0; j < weights.size(); ++j) {
        if (weights[j] <= 0.0)
            continue;
        acc += weights[j];
        last_positive = static_cast<std::uint32_t>(j);
        if (u < acc)
            return last_positive;
    }
    return last_positive;
}

} // namespace detail

/// `count` independent random walks of length T started from the initial
/// distribution. Each path carries probability 1/count. Deterministic for a
/// fixed seed.
inline PathEnsemble sample_paths(const MobilityModel& model, Deadline horizon, std::size_t count, std::uint64_t seed)
{
    if (count == 0)
        throw PreconditionError("sample_paths: count must be at least 1");
    const std::size_t n = model.cell_count();
    const auto t = static_cast<std::size_t>(horizon.slots());
    std::mt19937_64 rng(seed);
    std::vector<std::uint32_t> paths(count * t);
    for (std::size_t m = 0; m < count; ++m) {
        auto c = detail::draw_index(model.initial_distribution(), detail::unit_interval(rng()));
        paths[m * t] = c;
        for (std::size_t i = 1; i < t; ++i) {
            c = detail::draw_index(model.transition_matrix().subspan(c * n, n), detail::unit_interval(rng()));
            paths[m * t + i] = c;
        }
    }
    return PathEnsemble(n, horizon, std::move(paths), std::vector<double>(count, 1.0 / static_cast<double>(count)),
                        EnsembleKind::sampled, seed);
}

// ---------------------------------------------------------------------------
// SojournCCDF

/// P(S_{m,n} >= t) for every cell n and t = 1..T.
class SojournCCDF {
public:
    SojournCCDF(std::size_t cells, Deadline horizon, std::vector<double> table)
        : cells_(cells), horizon_(horizon), table_(std::move(table))
    {
        if (table_.size() != cells_ * static_cast<std::size_t>(horizon_.slots()))
            throw DimensionError("sojourn ccdf: table must be N x T");
    }

    std::size_t cell_count() const noexcept { return cells_; }
    Deadline horizon() const noexcept { return horizon_; }

    /// t is 1-based, in [1, T].
    double at_least(std::size_t n, int t) const
    {
        return table_[n * static_cast<std::size_t>(horizon_.slots()) + static_cast<std::size_t>(t - 1)];
    }
    std::span<const double> values() const noexcept { return table_; }

private:
    std::size_t cells_;
    Deadline horizon_;
    std::vector<double> table_;
};

inline SojournCCDF sojourn_ccdf(const PathEnsemble& ensemble)
{
    if (ensemble.size() == 0)
        throw PreconditionError("sojourn_ccdf: ensemble is empty");
    const std::size_t n = ensemble.cell_count();
    const int t = ensemble.horizon().slots();
    const auto tt = static_cast<std::size_t>(t);
    // exact[n][s] = P(S_n == s), accumulated in path order
    std::vector<detail::CompensatedSum> exact(n * (tt + 1));
    for (std::size_t m = 0; m < ensemble.size(); ++m) {
        const auto s = ensemble.sojourn(m);
        for (std::size_t c = 0; c < n; ++c)
            exact[c * (tt + 1) + static_cast<std::size_t>(s[c])] += ensemble.prob(m);
    }
    std::vector<double> table(n * tt);
    for (std::size_t c = 0; c < n; ++c) {
        detail::CompensatedSum tail;
        for (int s = t; s >= 1; --s) {
            tail += exact[c * (tt + 1) + static_cast<std::size_t>(s)].value();
            table[c * tt + static_cast<std::size_t>(s - 1)] = std::clamp(tail.value(), 0.0, 1.0);
        }
    }
    return SojournCCDF(n, ensemble.horizon(), std::move(table));
}

// ---------------------------------------------------------------------------
// Ensemble CSV: m,path,q,S_1..S_N with 1-based cells, path cells joined by '-'.

inline void write_ensemble_csv(std::ostream& out, const PathEnsemble& ensemble)
{
    out << "m,path,q";
    for (std::size_t c = 0; c < ensemble.cell_count(); ++c)
        out << ",S_" << (c + 1);
    out << '\n';
    for (std::size_t m = 0; m < ensemble.size(); ++m) {
        out << (m + 1) << ',';
        const auto p = ensemble.path(m);
        for (std::size_t i = 0; i < p.size(); ++i)
            out << (i ? "-" : "") << (p[i] + 1);
        out << ',' << detail::format_real(ensemble.prob(m));
        for (int s : ensemble.sojourn(m))
            out << ',' << s;
        out << '\n';
    }
}

} // namespace mcache
