#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>
#include <system_error>

namespace mcache::detail {

/// Neumaier-compensated accumulator. Summation order is the caller's
/// responsibility; the result is reproducible for a fixed order.
class CompensatedSum {
public:
    void add(double v) noexcept
    {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            carry_ += (sum_ - t) + v;
        else
            carry_ += (v - t) + sum_;
        sum_ = t;
    }

    CompensatedSum& operator+=(double v) noexcept
    {
        add(v);
        return *this;
    }

    double value() const noexcept { return sum_ + carry_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

/// Shortest representation that round-trips through strtod.
inline std::string format_real(double v)
{
    if (v == 0.0)
        v = 0.0; // drop the sign of -0
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{})
        return "nan";
    return std::string(buf, end);
}

/// Maps 64 random bits onto [0, 1) using the top 53 bits.
inline double unit_interval(std::uint64_t bits) noexcept
{
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

} // namespace mcache::detail
