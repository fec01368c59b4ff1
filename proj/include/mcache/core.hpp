#pragma once

// Shared domain types for coded small-cell caching: the video library, the
// cell network, cache placements and the delivery deadline.
//
// Units: every size is a real number of bits. Experiments normalize the file
// size to 1 so that objectives read directly as fractions of a file.

#include "mcache/detail/numeric.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mcache {

// ---------------------------------------------------------------------------
// Errors

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Mismatched matrix or vector shapes.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A model (library, network, chain) that violates its invariants.
class ModelError : public Error {
public:
    using Error::Error;
};

/// An operation called outside its documented preconditions.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// A size guard (enumeration, LP rows, brute-force candidates) was exceeded.
class BudgetError : public Error {
public:
    using Error::Error;
};

/// Relative tolerance used for feasibility and equality checks; scaled by B.
inline constexpr double kRelTol = 1e-9;

// ---------------------------------------------------------------------------
// VideoLibrary

/// K files of a common size B, indexed by non-increasing popularity.
class VideoLibrary {
public:
    VideoLibrary(double file_size, std::vector<double> popularity)
        : file_size_(file_size), popularity_(std::move(popularity))
    {
        if (!(file_size_ > 0.0) || !std::isfinite(file_size_))
            throw ModelError("library: file size must be positive");
        if (popularity_.empty())
            throw ModelError("library: at least one file is required");
        detail::CompensatedSum total;
        for (std::size_t k = 0; k < popularity_.size(); ++k) {
            const double p = popularity_[k];
            if (!(p >= 0.0) || !std::isfinite(p))
                throw ModelError("library: popularity of file " + std::to_string(k + 1) +
                                 " is negative or not finite");
            if (k > 0 && p > popularity_[k - 1])
                throw ModelError("library: popularity must be non-increasing in file index (file " +
                                 std::to_string(k + 1) + ")");
            total += p;
        }
        if (std::abs(total.value() - 1.0) > 1e-9)
            throw ModelError("library: popularity must sum to 1 (got " +
                             detail::format_real(total.value()) + ")");
    }

    /// p_k = k^-s / sum_j j^-s for k = 1..K.
    static VideoLibrary zipf(std::size_t file_count, double exponent, double file_size = 1.0)
    {
        if (file_count == 0)
            throw ModelError("library: at least one file is required");
        if (!(exponent >= 0.0))
            throw ModelError("library: zipf exponent must be nonnegative");
        std::vector<double> p(file_count);
        detail::CompensatedSum norm;
        for (std::size_t k = 0; k < file_count; ++k) {
            p[k] = std::pow(static_cast<double>(k + 1), -exponent);
            norm += p[k];
        }
        const double z = norm.value();
        for (double& v : p)
            v /= z;
        return VideoLibrary(file_size, std::move(p));
    }

    std::size_t file_count() const noexcept { return popularity_.size(); }
    double file_size() const noexcept { return file_size_; }
    double popularity(std::size_t k) const { return popularity_.at(k); }
    std::span<const double> popularity() const noexcept { return popularity_; }

    /// Absolute tolerance for checks on bit quantities.
    double tolerance() const noexcept { return kRelTol * file_size_; }

private:
    double file_size_;
    std::vector<double> popularity_;
};

// ---------------------------------------------------------------------------
// CellNetwork

/// 4-neighbourhood adjacency of a row-major width x height grid.
inline std::vector<char> grid_adjacency(std::size_t width, std::size_t height)
{
    const std::size_t n = width * height;
    std::vector<char> adj(n * n, 0);
    for (std::size_t r = 0; r < height; ++r) {
        for (std::size_t c = 0; c < width; ++c) {
            const std::size_t i = r * width + c;
            if (c + 1 < width) {
                adj[i * n + i + 1] = 1;
                adj[(i + 1) * n + i] = 1;
            }
            if (r + 1 < height) {
                adj[i * n + i + width] = 1;
                adj[(i + width) * n + i] = 1;
            }
        }
    }
    return adj;
}

/// N small cells, each with a per-slot rate R_n and cache capacity C_n.
class CellNetwork {
public:
    CellNetwork(std::vector<double> rate, std::vector<double> capacity, std::vector<char> adjacency)
        : rate_(std::move(rate)), capacity_(std::move(capacity)), adjacency_(std::move(adjacency))
    {
        const std::size_t n = rate_.size();
        if (n == 0)
            throw ModelError("network: at least one cell is required");
        if (capacity_.size() != n)
            throw DimensionError("network: capacity vector length differs from rate vector length");
        if (adjacency_.size() != n * n)
            throw DimensionError("network: adjacency must be N x N");
        for (std::size_t i = 0; i < n; ++i) {
            if (!(rate_[i] > 0.0) || !std::isfinite(rate_[i]))
                throw ModelError("network: rate of cell " + std::to_string(i + 1) + " must be positive");
            if (!(capacity_[i] >= 0.0) || !std::isfinite(capacity_[i]))
                throw ModelError("network: capacity of cell " + std::to_string(i + 1) +
                                 " must be nonnegative");
            if (adjacency_[i * n + i])
                throw ModelError("network: adjacency has a self-edge at cell " + std::to_string(i + 1));
            for (std::size_t j = 0; j < n; ++j)
                if ((adjacency_[i * n + j] != 0) != (adjacency_[j * n + i] != 0))
                    throw ModelError("network: adjacency is not symmetric");
        }
    }

    /// Grid network with uniform rate and capacity.
    static CellNetwork grid(std::size_t width, std::size_t height, double rate, double capacity)
    {
        const std::size_t n = width * height;
        return CellNetwork(std::vector<double>(n, rate), std::vector<double>(n, capacity),
                           grid_adjacency(width, height));
    }

    std::size_t cell_count() const noexcept { return rate_.size(); }
    double rate(std::size_t n) const { return rate_.at(n); }
    double capacity(std::size_t n) const { return capacity_.at(n); }
    std::span<const double> rates() const noexcept { return rate_; }
    std::span<const double> capacities() const noexcept { return capacity_; }
    bool adjacent(std::size_t i, std::size_t j) const { return adjacency_.at(i * cell_count() + j) != 0; }
    std::span<const char> adjacency() const noexcept { return adjacency_; }

    double max_rate() const noexcept { return *std::max_element(rate_.begin(), rate_.end()); }
    double min_rate() const noexcept { return *std::min_element(rate_.begin(), rate_.end()); }

    CellNetwork with_capacity(std::vector<double> capacity) const
    {
        return CellNetwork(rate_, std::move(capacity), adjacency_);
    }

private:
    std::vector<double> rate_;
    std::vector<double> capacity_;
    std::vector<char> adjacency_;
};

// ---------------------------------------------------------------------------
// Deadline

/// Delivery deadline in slots, T >= 1.
class Deadline {
public:
    explicit Deadline(int slots) : slots_(slots)
    {
        if (slots_ < 1)
            throw ModelError("deadline: T must be at least one slot");
    }
    int slots() const noexcept { return slots_; }
    friend bool operator==(Deadline, Deadline) = default;

private:
    int slots_;
};

// ---------------------------------------------------------------------------
// CachingPolicy

/// N x K matrix of parity bits stored per cell per file.
class CachingPolicy {
public:
    CachingPolicy(std::size_t cells, std::size_t files) : cells_(cells), files_(files), x_(cells * files, 0.0) {}

    CachingPolicy(std::size_t cells, std::size_t files, std::vector<double> values)
        : cells_(cells), files_(files), x_(std::move(values))
    {
        if (x_.size() != cells_ * files_)
            throw DimensionError("policy: value count does not match N x K");
    }

    std::size_t cell_count() const noexcept { return cells_; }
    std::size_t file_count() const noexcept { return files_; }

    double operator()(std::size_t n, std::size_t k) const noexcept { return x_[n * files_ + k]; }
    double& operator()(std::size_t n, std::size_t k) noexcept { return x_[n * files_ + k]; }

    std::span<const double> row(std::size_t n) const { return {x_.data() + n * files_, files_}; }
    std::span<double> row(std::size_t n) { return {x_.data() + n * files_, files_}; }
    std::span<const double> values() const noexcept { return x_; }

    double cell_load(std::size_t n) const
    {
        detail::CompensatedSum s;
        for (double v : row(n))
            s += v;
        return s.value();
    }

    friend bool operator==(const CachingPolicy&, const CachingPolicy&) = default;

private:
    std::size_t cells_;
    std::size_t files_;
    std::vector<double> x_;
};

struct CellOverflow {
    std::size_t cell;
    double overshoot; ///< load minus capacity, bits
};

struct NegativeEntry {
    std::size_t cell;
    std::size_t file;
    double value;
};

/// Outcome of a feasibility check. Structural problems throw instead.
struct PolicyVerdict {
    std::vector<CellOverflow> overflows;
    std::vector<NegativeEntry> negatives;

    bool feasible() const noexcept { return overflows.empty() && negatives.empty(); }
    explicit operator bool() const noexcept { return feasible(); }
};

inline void check_policy_shape(const CachingPolicy& policy, const CellNetwork& network,
                               const VideoLibrary& library)
{
    if (policy.cell_count() != network.cell_count() || policy.file_count() != library.file_count())
        throw DimensionError("policy is " + std::to_string(policy.cell_count()) + "x" +
                             std::to_string(policy.file_count()) + " but the scenario is " +
                             std::to_string(network.cell_count()) + "x" +
                             std::to_string(library.file_count()));
}

/// Checks x >= 0 and per-cell load <= C_n, both within 1e-9 B.
inline PolicyVerdict validate_policy(const CachingPolicy& policy, const CellNetwork& network,
                                     const VideoLibrary& library)
{
    check_policy_shape(policy, network, library);
    const double tol = library.tolerance();
    PolicyVerdict verdict;
    for (std::size_t n = 0; n < policy.cell_count(); ++n) {
        for (std::size_t k = 0; k < policy.file_count(); ++k)
            if (policy(n, k) < -tol || !std::isfinite(policy(n, k)))
                verdict.negatives.push_back({n, k, policy(n, k)});
        const double over = policy.cell_load(n) - network.capacity(n);
        if (over > tol)
            verdict.overflows.push_back({n, over});
    }
    return verdict;
}

/// B / max_n R_n, in (real) slots.
inline double t_min(const VideoLibrary& library, const CellNetwork& network)
{
    return library.file_size() / network.max_rate();
}

/// Largest whole deadline not exceeding t_min (at least one slot).
inline Deadline t_min_slots(const VideoLibrary& library, const CellNetwork& network)
{
    const double t = t_min(library, network);
    return Deadline(std::max(1, static_cast<int>(std::floor(t + kRelTol * std::max(1.0, t)))));
}

// ---------------------------------------------------------------------------
// Policy CSV: header "cell,1,...,K", one row per cell, indices 1-based.

inline void write_policy_csv(std::ostream& out, const CachingPolicy& policy)
{
    out << "cell";
    for (std::size_t k = 0; k < policy.file_count(); ++k)
        out << ',' << (k + 1);
    out << '\n';
    for (std::size_t n = 0; n < policy.cell_count(); ++n) {
        out << (n + 1);
        for (double v : policy.row(n))
            out << ',' << detail::format_real(v);
        out << '\n';
    }
}

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line)
{
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        fields.push_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    for (auto& f : fields) {
        while (!f.empty() && (f.front() == ' ' || f.front() == '\t'))
            f.remove_prefix(1);
        while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r'))
            f.remove_suffix(1);
    }
    return fields;
}

inline double parse_real(std::string_view s, const std::string& what)
{
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw Error(what + ": cannot parse '" + std::string(s) + "' as a number");
    return v;
}

} // namespace detail

inline CachingPolicy read_policy_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line))
        throw Error("policy csv: empty input");
    const auto header = detail::split_csv_line(line);
    if (header.empty() || header.front() != "cell")
        throw Error("policy csv: header must start with 'cell'");
    const std::size_t files = header.size() - 1;
    for (std::size_t k = 0; k < files; ++k)
        if (header[k + 1] != std::to_string(k + 1))
            throw Error("policy csv: header column " + std::to_string(k + 2) + " must be file index " +
                        std::to_string(k + 1));
    std::vector<double> values;
    std::size_t cells = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r")
            continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != files + 1)
            throw DimensionError("policy csv: row " + std::to_string(cells + 1) + " has " +
                                 std::to_string(fields.size() - 1) + " values, expected " +
                                 std::to_string(files));
        if (fields[0] != std::to_string(cells + 1))
            throw Error("policy csv: rows must be numbered 1..N in order");
        for (std::size_t k = 0; k < files; ++k)
            values.push_back(detail::parse_real(fields[k + 1], "policy csv"));
        ++cells;
    }
    return CachingPolicy(cells, files, std::move(values));
}

inline CachingPolicy read_policy_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open policy file '" + path + "'");
    return read_policy_csv(in);
}

} // namespace mcache
