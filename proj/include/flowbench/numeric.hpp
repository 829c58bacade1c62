// SPDX-FileCopyrightText: © 2026 flowbench contributors
//
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <system_error>

#include "flowbench/errors.hpp"

namespace flowbench {

/// Shortest decimal representation that round-trips to the same double.
/// All text outputs (CSV, SVG, canonical traces) go through this so repeated
/// runs are byte-identical.
inline std::string format_double(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

/// Neumaier-compensated accumulator. Together with a fixed summation order
/// this makes metric results platform-deterministic.
class CompensatedSum {
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
    [[nodiscard]] double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

namespace detail {

struct UnitScale {
    std::string_view prefix;
    double factor;
};

// Decimal prefixes are powers of 1000, binary (IEC) prefixes powers of 1024.
inline constexpr UnitScale kScales[] = {
    {"Ki", 1024.0},
    {"Mi", 1024.0 * 1024},
    {"Gi", 1024.0 * 1024 * 1024},
    {"Ti", 1024.0 * 1024 * 1024 * 1024},
    {"Pi", 1024.0 * 1024 * 1024 * 1024 * 1024},
    {"k", 1e3},
    {"K", 1e3},
    {"M", 1e6},
    {"G", 1e9},
    {"T", 1e12},
    {"P", 1e15},
    {"", 1.0},
};

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

}  // namespace detail

/// Parses "<number> [<scale>]<unit>" where unit is one of a caller-supplied
/// list of spellings ("B", "B/s", "FLOPS", "FLOP/s", or empty). Returns the
/// value normalized to the base unit. Throws ValidationError on an
/// unrecognized suffix, e.g. "40 Gb" when bytes were expected.
inline double parse_quantity(std::string_view text, std::initializer_list<std::string_view> unit_spellings,
                             const std::string& field_name) {
    std::string_view s = detail::trim(text);
    double number = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), number);
    if (res.ec != std::errc() || res.ptr == s.data()) {
        throw ValidationError(field_name + ": cannot parse number from \"" + std::string(text) + "\"");
    }
    if (number < 0.0) {
        throw ValidationError(field_name + ": must be >= 0, got \"" + std::string(text) + "\"");
    }
    std::string_view rest = detail::trim(std::string_view(res.ptr, static_cast<std::size_t>(s.data() + s.size() - res.ptr)));
    for (const auto& scale : detail::kScales) {
        if (rest.size() < scale.prefix.size() || rest.substr(0, scale.prefix.size()) != scale.prefix) continue;
        std::string_view unit = rest.substr(scale.prefix.size());
        for (std::string_view spelling : unit_spellings) {
            if (unit == spelling) return number * scale.factor;
        }
    }
    throw ValidationError(field_name + ": unrecognized unit suffix \"" + std::string(rest) + "\" in \"" +
                          std::string(text) + "\"");
}

inline double parse_bytes(std::string_view text, const std::string& field_name) {
    return parse_quantity(text, {"B", ""}, field_name);
}

inline double parse_bytes_per_s(std::string_view text, const std::string& field_name) {
    return parse_quantity(text, {"B/s", ""}, field_name);
}

inline double parse_flops_per_s(std::string_view text, const std::string& field_name) {
    return parse_quantity(text, {"FLOPS", "FLOPS/s", "FLOP/s", ""}, field_name);
}

/// FNV-1a 64-bit digest, hex-encoded. Used for input provenance in reports.
inline std::string fnv1a64_hex(std::string_view data) {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        hash ^= c;
        hash *= 0x100000001b3ull;
    }
    char buf[17];
    static const char* digits = "0123456789abcdef";
    for (int i = 15; i >= 0; --i) {
        buf[i] = digits[hash & 0xf];
        hash >>= 4;
    }
    return std::string(buf, 16);
}

}  // namespace flowbench
