#pragma once

// Placement policies: the gamma-based per-cell allocation, greedy
// reallocation of R_n-sized chunks between files, and the most-popular
// whole-file baseline.

#include "mcache/core.hpp"
#include "mcache/evaluator.hpp"
#include "mcache/mobility.hpp"

#include <limits>

namespace mcache {

/// Marginal value of the t-th R_n-sized chunk of file k in cell n:
/// gamma[n][k][t] = p_k * P(S_n >= t).
class GammaTable {
public:
    GammaTable(std::size_t cells, std::size_t files, Deadline horizon, std::vector<double> values)
        : cells_(cells), files_(files), horizon_(horizon), values_(std::move(values))
    {
        if (values_.size() != cells_ * files_ * static_cast<std::size_t>(horizon_.slots()))
            throw DimensionError("gamma table: value count does not match N x K x T");
    }

    std::size_t cell_count() const noexcept { return cells_; }
    std::size_t file_count() const noexcept { return files_; }
    Deadline horizon() const noexcept { return horizon_; }

    /// t is 1-based.
    double operator()(std::size_t n, std::size_t k, int t) const noexcept
    {
        const auto tt = static_cast<std::size_t>(horizon_.slots());
        return values_[(n * files_ + k) * tt + static_cast<std::size_t>(t - 1)];
    }

    GammaTable scaled(double factor) const
    {
        std::vector<double> v(values_);
        for (double& x : v)
            x *= factor;
        return GammaTable(cells_, files_, horizon_, std::move(v));
    }

private:
    std::size_t cells_;
    std::size_t files_;
    Deadline horizon_;
    std::vector<double> values_;
};

inline GammaTable gamma_table(const VideoLibrary& library, const SojournCCDF& ccdf)
{
    const std::size_t cells = ccdf.cell_count();
    const std::size_t files = library.file_count();
    const int t_max = ccdf.horizon().slots();
    std::vector<double> v;
    v.reserve(cells * files * static_cast<std::size_t>(t_max));
    for (std::size_t n = 0; n < cells; ++n)
        for (std::size_t k = 0; k < files; ++k)
            for (int t = 1; t <= t_max; ++t)
                v.push_back(library.popularity(k) * ccdf.at_least(n, t));
    return GammaTable(cells, files, ccdf.horizon(), std::move(v));
}

/// Gamma-based placement together with the gamma value behind each grant,
/// in grant order, per cell.
struct GammaAllocation {
    CachingPolicy policy;
    std::vector<std::vector<double>> granted_gamma;
};

/// Per cell: repeatedly take the largest remaining gamma[n][k][t], grant
/// min(remaining capacity, R_n) bits to file k, until capacity runs out or
/// only zero-valued chunks remain. Ties go to the lower file index, then to
/// the lower t. Optimal when T <= t_min. `tolerance` is the capacity slack
/// (in bits) below which a cell counts as full.
inline GammaAllocation gamma_allocate(const GammaTable& gamma, const CellNetwork& network, double tolerance)
{
    if (gamma.cell_count() != network.cell_count())
        throw DimensionError("gamma_policy: gamma table and network disagree on N");
    const std::size_t cells = network.cell_count();
    const std::size_t files = gamma.file_count();
    const int t_max = gamma.horizon().slots();

    GammaAllocation out{CachingPolicy(cells, files), std::vector<std::vector<double>>(cells)};

    struct Entry {
        double value;
        std::uint32_t file;
        int t;
    };
    std::vector<Entry> entries;
    entries.reserve(files * static_cast<std::size_t>(t_max));

    for (std::size_t n = 0; n < cells; ++n) {
        entries.clear();
        for (std::size_t k = 0; k < files; ++k)
            for (int t = 1; t <= t_max; ++t)
                entries.push_back({gamma(n, k, t), static_cast<std::uint32_t>(k), t});
        std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
            if (a.value != b.value)
                return a.value > b.value;
            if (a.file != b.file)
                return a.file < b.file;
            return a.t < b.t;
        });

        const double rate = network.rate(n);
        double remaining = network.capacity(n);
        for (const Entry& e : entries) {
            if (remaining <= tolerance || e.value <= 0.0)
                break;
            const double grant = std::min(remaining, rate);
            out.policy(n, e.file) += grant;
            out.granted_gamma[n].push_back(e.value);
            remaining -= grant;
        }
    }
    return out;
}

inline GammaAllocation gamma_allocate(const VideoLibrary& library, const CellNetwork& network,
                                      const SojournCCDF& ccdf)
{
    if (ccdf.cell_count() != network.cell_count())
        throw DimensionError("gamma_policy: sojourn table and network disagree on N");
    return gamma_allocate(gamma_table(library, ccdf), network, library.tolerance());
}

inline CachingPolicy gamma_policy(const VideoLibrary& library, const CellNetwork& network, const SojournCCDF& ccdf)
{
    return gamma_allocate(library, network, ccdf).policy;
}

// ---------------------------------------------------------------------------
// Greedy reallocation

struct GreedyOptions {
    /// Reallocation step per cell; empty means R_n.
    std::optional<double> step;
    /// A swap is applied only if it lowers d_av by more than epsilon * B.
    double epsilon = kRelTol;
};

/// Increment/decrement candidates for one cell, with their d_av changes.
/// Sign convention: delta_plus[k] = d_av(x) - d_av(x + step) >= 0 and
/// delta_minus[k] = d_av(x) - d_av(x - step) <= 0. Absent entries are empty.
struct SwapCandidates {
    std::vector<std::size_t> v_plus;
    std::vector<std::size_t> v_minus;
    std::vector<std::optional<double>> delta_plus;
    std::vector<std::optional<double>> delta_minus;
};

struct GreedyResult {
    CachingPolicy policy;
    std::vector<std::size_t> swaps_per_cell;
};

namespace detail {

struct SwapChoice {
    std::size_t increase;
    std::size_t decrease;
    double gain; ///< delta_plus + delta_minus, the net reduction of d_av
};

// Best increment prefers the lower (more popular) file on ties; best
// decrement prefers the higher (less popular) one.
inline std::optional<SwapChoice> choose_swap(const SwapCandidates& c)
{
    auto best_plus = [&](std::optional<std::size_t> exclude) {
        std::optional<std::size_t> best;
        for (auto k : c.v_plus) {
            if (!c.delta_plus[k] || (exclude && *exclude == k))
                continue;
            if (!best || *c.delta_plus[k] > *c.delta_plus[*best] ||
                (*c.delta_plus[k] == *c.delta_plus[*best] && k < *best))
                best = k;
        }
        return best;
    };
    auto best_minus = [&](std::optional<std::size_t> exclude) {
        std::optional<std::size_t> best;
        for (auto k : c.v_minus) {
            if (!c.delta_minus[k] || (exclude && *exclude == k))
                continue;
            if (!best || *c.delta_minus[k] > *c.delta_minus[*best] ||
                (*c.delta_minus[k] == *c.delta_minus[*best] && k > *best))
                best = k;
        }
        return best;
    };
    auto make = [&](std::optional<std::size_t> up, std::optional<std::size_t> down) -> std::optional<SwapChoice> {
        if (!up || !down)
            return std::nullopt;
        return SwapChoice{*up, *down, *c.delta_plus[*up] + *c.delta_minus[*down]};
    };

    const auto up = best_plus(std::nullopt);
    const auto down = best_minus(std::nullopt);
    if (!up || !down)
        return std::nullopt;
    if (*up != *down)
        return make(up, down);

    // Same file on both sides: fall back to the best pairing that differs.
    const auto a = make(up, best_minus(*up));
    const auto b = make(best_plus(*down), down);
    if (a && b)
        return b->gain > a->gain ? b : a;
    return a ? a : b;
}

} // namespace detail

/// Per-cell local search starting from `seed`. Cells are processed in index
/// order against the current placement so every applied swap lowers d_av.
inline GreedyResult greedy_reallocate(const CachingPolicy& seed, const Evaluator& evaluator,
                                      const GreedyOptions& options = {})
{
    const auto& library = evaluator.library();
    const auto& network = evaluator.network();
    const auto verdict = validate_policy(seed, network, library);
    if (!verdict)
        throw PreconditionError("greedy_policy: seed placement is infeasible");

    const std::size_t files = library.file_count();
    const double tol = library.tolerance();
    const double threshold = options.epsilon * library.file_size();
    const int horizon = evaluator.horizon().slots();

    GreedyResult result{seed, std::vector<std::size_t>(network.cell_count(), 0)};
    CachingPolicy& x = result.policy;

    for (std::size_t n = 0; n < network.cell_count(); ++n) {
        const double step = options.step.value_or(network.rate(n));
        if (!(step > 0.0))
            throw PreconditionError("greedy_policy: reallocation step must be positive");
        const double cap = std::min(library.file_size(), horizon * network.rate(n));

        SwapCandidates cand;
        cand.delta_plus.assign(files, std::nullopt);
        cand.delta_minus.assign(files, std::nullopt);
        std::vector<char> in_plus(files), in_minus(files);

        while (true) {
            cand.v_plus.clear();
            cand.v_minus.clear();
            std::fill(in_plus.begin(), in_plus.end(), 0);
            std::fill(in_minus.begin(), in_minus.end(), 0);

            const auto row = x.row(n);
            const double x_max = *std::max_element(row.begin(), row.end());
            for (int level_index = 0;; ++level_index) {
                const double level = x_max - level_index * step;
                if (level <= tol)
                    break;
                // least popular file holding at least `level` bits
                std::size_t k = files;
                for (std::size_t j = files; j-- > 0;)
                    if (row[j] >= level - tol) {
                        k = j;
                        break;
                    }
                if (k == files)
                    break;
                if (!in_minus[k]) {
                    in_minus[k] = 1;
                    cand.v_minus.push_back(k);
                    if (!cand.delta_minus[k] && row[k] - step >= -tol)
                        cand.delta_minus[k] = -evaluator.delta(x, n, k, -std::min(step, row[k]));
                }
                const std::size_t next = k + 1;
                if (next < files && !in_plus[next]) {
                    in_plus[next] = 1;
                    cand.v_plus.push_back(next);
                    if (!cand.delta_plus[next] && row[next] + step <= cap + tol)
                        cand.delta_plus[next] = -evaluator.delta(x, n, next, step);
                }
            }

            const auto choice = detail::choose_swap(cand);
            if (!choice || !(choice->gain > threshold))
                break;
            x(n, choice->increase) += step;
            x(n, choice->decrease) = std::max(0.0, x(n, choice->decrease) - step);
            cand.delta_plus[choice->increase].reset();
            cand.delta_minus[choice->increase].reset();
            cand.delta_plus[choice->decrease].reset();
            cand.delta_minus[choice->decrease].reset();
            ++result.swaps_per_cell[n];
        }
    }
    return result;
}

inline CachingPolicy greedy_policy(const CachingPolicy& seed, const PathEnsemble& ensemble, const VideoLibrary& library,
                                   const CellNetwork& network, const GreedyOptions& options = {})
{
    return greedy_reallocate(seed, Evaluator(ensemble, library, network), options).policy;
}

// ---------------------------------------------------------------------------

/// Whole files in popularity order until the cell is full; a leftover that is
/// not a whole file goes to the next file.
inline CachingPolicy most_popular_policy(const VideoLibrary& library, const CellNetwork& network)
{
    const std::size_t files = library.file_count();
    const double b = library.file_size();
    CachingPolicy x(network.cell_count(), files);
    for (std::size_t n = 0; n < network.cell_count(); ++n) {
        double remaining = network.capacity(n);
        for (std::size_t k = 0; k < files && remaining > library.tolerance(); ++k) {
            const double grant = std::min(remaining, b);
            x(n, k) = grant;
            remaining -= grant;
        }
    }
    return x;
}

} // namespace mcache
