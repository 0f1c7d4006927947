#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <system_error>

#include "sismon/errors.hpp"

namespace sismon {

// Kahan-Babuska compensated accumulator. Used for every statistic that feeds
// a report or a variance formula so results do not depend on pool size tricks.
class KahanSum {
  public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }

    double value() const { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// Shortest decimal string that round-trips through from_chars to the same
// double. All CSV/JSON serialization of doubles goes through here so a plan
// written to disk and read back reproduces estimates bit-for-bit.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text, const std::string& context) {
    if (text == "nan") return std::nan("");
    if (text == "inf") return std::numeric_limits<double>::infinity();
    if (text == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw data_error(context + ": not a number: '" + std::string(text) + "'");
    }
    return v;
}

inline std::int64_t parse_int(std::string_view text, const std::string& context) {
    std::int64_t v = 0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw data_error(context + ": not an integer: '" + std::string(text) + "'");
    }
    return v;
}

inline std::uint64_t parse_uint64(std::string_view text, const std::string& context) {
    std::uint64_t v = 0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw data_error(context + ": not an unsigned integer: '" + std::string(text) + "'");
    }
    return v;
}

}  // namespace sismon
