#pragma once

// Expected MBS download for a placement: per-path per-file deficits
//   d_{k,m} = max{B - sum_n min{x_{n,k}, R_n S_{m,n}}, 0}
// averaged with weights q_m p_k.

#include "mcache/core.hpp"
#include "mcache/mobility.hpp"

#include <map>
#include <optional>

namespace mcache {

/// MBS deficit of one file along one sojourn profile.
inline double deficit(const CachingPolicy& policy, const VideoLibrary& library, const CellNetwork& network,
                      std::span<const int> sojourn, std::size_t file)
{
    if (sojourn.size() != network.cell_count())
        throw DimensionError("deficit: sojourn row must have N entries");
    detail::CompensatedSum collected;
    for (std::size_t n = 0; n < sojourn.size(); ++n)
        if (sojourn[n] > 0)
            collected += std::min(policy(n, file), network.rate(n) * sojourn[n]);
    return std::max(library.file_size() - collected.value(), 0.0);
}

struct EvalOptions {
    bool per_file = false;     ///< expected deficit per file, sum_m q_m d_{k,m}
    bool per_path = false;     ///< per-path contribution sum_k p_k d_{k,m}
    bool deficit_matrix = false; ///< full M x K matrix d_{k,m}
};

struct EvalReport {
    double d_av = 0.0;
    std::vector<double> per_file;       ///< length K when requested
    std::vector<double> per_path;       ///< length M when requested
    std::vector<double> deficits;       ///< M x K row-major when requested
};

/// Preprocessed ensemble for repeated evaluation of placements.
///
/// Paths with identical sojourn rows are merged into one profile; a deficit
/// depends on a path only through its sojourn row so merging is exact up to
/// summation order.
class Evaluator {
public:
    Evaluator(const PathEnsemble& ensemble, const VideoLibrary& library, const CellNetwork& network)
        : library_(library), network_(network), horizon_(ensemble.horizon()), path_count_(ensemble.size())
    {
        if (ensemble.cell_count() != network.cell_count())
            throw DimensionError("evaluator: ensemble and network disagree on the number of cells");
        if (ensemble.size() == 0)
            throw PreconditionError("evaluator: ensemble is empty");

        std::map<std::vector<int>, std::size_t> index;
        std::vector<detail::CompensatedSum> weights;
        path_profile_.resize(ensemble.size());
        for (std::size_t m = 0; m < ensemble.size(); ++m) {
            const auto s = ensemble.sojourn(m);
            std::vector<int> key(s.begin(), s.end());
            auto [it, inserted] = index.try_emplace(std::move(key), profiles_.size());
            if (inserted) {
                Profile p;
                for (std::size_t n = 0; n < s.size(); ++n)
                    if (s[n] > 0)
                        p.visits.push_back({static_cast<std::uint32_t>(n), network.rate(n) * s[n]});
                profiles_.push_back(std::move(p));
                weights.emplace_back();
            }
            weights[it->second] += ensemble.prob(m);
            path_profile_[m] = it->second;
        }
        by_cell_.resize(network.cell_count());
        for (std::size_t g = 0; g < profiles_.size(); ++g) {
            profiles_[g].weight = weights[g].value();
            for (const auto& v : profiles_[g].visits)
                by_cell_[v.cell].push_back(static_cast<std::uint32_t>(g));
        }
    }

    const VideoLibrary& library() const noexcept { return library_; }
    const CellNetwork& network() const noexcept { return network_; }
    Deadline horizon() const noexcept { return horizon_; }
    std::size_t profile_count() const noexcept { return profiles_.size(); }
    std::size_t path_count() const noexcept { return path_count_; }

    EvalReport evaluate(const CachingPolicy& policy, const EvalOptions& options = {}) const
    {
        check_policy_shape(policy, network_, library_);
        const std::size_t files = library_.file_count();
        EvalReport report;
        if (options.per_file)
            report.per_file.resize(files);

        // profile-level deficits are needed for per-path outputs
        const bool keep_profiles = options.per_path || options.deficit_matrix;
        std::vector<double> profile_deficit;
        if (keep_profiles)
            profile_deficit.resize(profiles_.size() * files);

        detail::CompensatedSum total;
        for (std::size_t k = 0; k < files; ++k) {
            detail::CompensatedSum file_sum;
            for (std::size_t g = 0; g < profiles_.size(); ++g) {
                const double d = profile_deficit_of(policy, g, k, kNoOverride, 0.0);
                file_sum += profiles_[g].weight * d;
                if (keep_profiles)
                    profile_deficit[g * files + k] = d;
            }
            if (options.per_file)
                report.per_file[k] = file_sum.value();
            total += library_.popularity(k) * file_sum.value();
        }
        report.d_av = total.value();

        if (options.deficit_matrix) {
            report.deficits.resize(path_count_ * files);
            for (std::size_t m = 0; m < path_count_; ++m)
                std::copy_n(profile_deficit.begin() + static_cast<std::ptrdiff_t>(path_profile_[m] * files), files,
                            report.deficits.begin() + static_cast<std::ptrdiff_t>(m * files));
        }
        if (options.per_path) {
            std::vector<double> contribution(profiles_.size());
            for (std::size_t g = 0; g < profiles_.size(); ++g) {
                detail::CompensatedSum c;
                for (std::size_t k = 0; k < files; ++k)
                    c += library_.popularity(k) * profile_deficit[g * files + k];
                contribution[g] = c.value();
            }
            report.per_path.resize(path_count_);
            for (std::size_t m = 0; m < path_count_; ++m)
                report.per_path[m] = contribution[path_profile_[m]];
        }
        return report;
    }

    double d_av(const CachingPolicy& policy) const { return evaluate(policy).d_av; }

    /// Change in d_av when x_{cell,file} moves by `delta_bits`. Only paths that
    /// visit `cell` and only `file` are touched. Capacity is not checked here:
    /// a positive delta may overfill the cell when it is half of a paired swap.
    double delta(const CachingPolicy& policy, std::size_t cell, std::size_t file, double delta_bits) const
    {
        check_policy_shape(policy, network_, library_);
        if (cell >= network_.cell_count() || file >= library_.file_count())
            throw PreconditionError("evaluate_delta: cell or file index out of range");
        if (!std::isfinite(delta_bits))
            throw PreconditionError("evaluate_delta: delta must be finite");
        const double updated = policy(cell, file) + delta_bits;
        if (updated < -library_.tolerance())
            throw PreconditionError("evaluate_delta: x_{n,k} + delta would be negative (" +
                                    detail::format_real(updated) + ")");
        if (delta_bits == 0.0)
            return 0.0;
        detail::CompensatedSum change;
        for (auto g : by_cell_[cell]) {
            const double before = profile_deficit_of(policy, g, file, kNoOverride, 0.0);
            const double after = profile_deficit_of(policy, g, file, cell, std::max(updated, 0.0));
            change += profiles_[g].weight * (after - before);
        }
        return library_.popularity(file) * change.value();
    }

private:
    struct Visit {
        std::uint32_t cell;
        double budget; ///< R_n * S_{m,n}
    };
    struct Profile {
        std::vector<Visit> visits;
        double weight = 0.0;
    };

    static constexpr std::size_t kNoOverride = static_cast<std::size_t>(-1);

    // Deficit of `file` on profile g, with x_{override_cell,file} replaced by
    // `override_value`.
    double profile_deficit_of(const CachingPolicy& policy, std::size_t g, std::size_t file,
                              std::size_t override_cell, double override_value) const
    {
        double collected = 0.0;
        for (const auto& v : profiles_[g].visits) {
            const double x = v.cell == override_cell ? override_value : policy(v.cell, file);
            collected += std::min(x, v.budget);
        }
        return std::max(library_.file_size() - collected, 0.0);
    }

    VideoLibrary library_;
    CellNetwork network_;
    Deadline horizon_;
    std::size_t path_count_;
    std::vector<Profile> profiles_;
    std::vector<std::vector<std::uint32_t>> by_cell_;
    std::vector<std::size_t> path_profile_;
};

inline EvalReport evaluate(const CachingPolicy& policy, const PathEnsemble& ensemble, const VideoLibrary& library,
                           const CellNetwork& network, const EvalOptions& options = {})
{
    return Evaluator(ensemble, library, network).evaluate(policy, options);
}

inline double evaluate_delta(const CachingPolicy& policy, const PathEnsemble& ensemble, const VideoLibrary& library,
                             const CellNetwork& network, std::size_t cell, std::size_t file, double delta_bits)
{
    return Evaluator(ensemble, library, network).delta(policy, cell, file, delta_bits);
}

} // namespace mcache
