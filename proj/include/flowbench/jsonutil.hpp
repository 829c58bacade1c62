// SPDX-FileCopyrightText: © 2026 flowbench contributors
//
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "flowbench/errors.hpp"
#include "flowbench/numeric.hpp"

namespace flowbench {

using json = nlohmann::json;

namespace detail {

/// Translate a byte offset reported by the JSON parser into 1-based
/// line/column for error messages.
inline std::pair<std::size_t, std::size_t> offset_to_line_col(std::string_view text,
                                                              std::size_t byte_offset) {
    std::size_t line = 1;
    std::size_t col = 1;
    const std::size_t end = byte_offset < text.size() ? byte_offset : text.size();
    for (std::size_t i = 0; i < end; ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

}  // namespace detail

/// Parse a JSON document, converting parser exceptions into ParseError with
/// line/column positions. `what` names the document for the message.
inline json parse_json(std::string_view text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        const auto [line, col] = detail::offset_to_line_col(text, e.byte > 0 ? e.byte - 1 : 0);
        std::string reason = e.what();
        // Strip the library's "[json.exception.parse_error.N]" prefix.
        if (const auto pos = reason.find("] "); pos != std::string::npos) {
            reason = reason.substr(pos + 2);
        }
        throw ParseError(what + ": " + reason, line, col);
    }
}

inline void require_type(const json& v, json::value_t type, const std::string& field) {
    static const auto type_name = [](json::value_t t) -> const char* {
        switch (t) {
            case json::value_t::object: return "object";
            case json::value_t::array: return "array";
            case json::value_t::string: return "string";
            case json::value_t::boolean: return "boolean";
            case json::value_t::number_integer:
            case json::value_t::number_unsigned:
            case json::value_t::number_float: return "number";
            default: return "value";
        }
    };
    const bool numeric_ok = type == json::value_t::number_float && v.is_number();
    if (v.type() != type && !numeric_ok) {
        throw ValidationError(field + ": expected " + std::string(type_name(type)));
    }
}

/// Reject any key not in `allowed`; self-describing files must not carry
/// silently ignored content.
inline void reject_unknown_fields(const json& obj, std::initializer_list<std::string_view> allowed,
                                  const std::string& what) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        bool known = false;
        for (const auto& a : allowed) {
            if (key == a) {
                known = true;
                break;
            }
        }
        if (!known) throw ValidationError(what + ": unknown field \"" + key + "\"");
    }
}

inline const json& require_field(const json& obj, const std::string& field,
                                 const std::string& what) {
    const auto it = obj.find(field);
    if (it == obj.end() || it->is_null()) {
        throw ValidationError(what + ": required field missing: " + field);
    }
    return *it;
}

inline std::string get_string(const json& obj, const std::string& field, const std::string& what) {
    const json& v = require_field(obj, field, what);
    require_type(v, json::value_t::string, what + "." + field);
    return v.get<std::string>();
}

inline std::int64_t get_int(const json& v, const std::string& field) {
    if (!v.is_number_integer() && !v.is_number_unsigned()) {
        throw ValidationError(field + ": expected integer");
    }
    return v.get<std::int64_t>();
}

inline double get_number(const json& v, const std::string& field) {
    if (!v.is_number()) throw ValidationError(field + ": expected number");
    return v.get<double>();
}

/// A physical quantity may be a bare JSON number (canonical units) or a
/// string with a unit suffix, e.g. "40GiB" or "20PB/s".
inline double get_quantity(const json& v, const std::string& field,
                           const std::function<double(std::string_view, const std::string&)>& parse) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return parse(v.get<std::string>(), field);
    throw ValidationError(field + ": expected number or unit-suffixed string");
}

inline double get_bytes_quantity(const json& v, const std::string& field) {
    return get_quantity(v, field, [](std::string_view s, const std::string& f) {
        return parse_bytes(s, f);
    });
}

inline double get_bandwidth_quantity(const json& v, const std::string& field) {
    return get_quantity(v, field, [](std::string_view s, const std::string& f) {
        return parse_bytes_per_s(s, f);
    });
}

inline double get_flops_quantity(const json& v, const std::string& field) {
    return get_quantity(v, field, [](std::string_view s, const std::string& f) {
        return parse_flops_per_s(s, f);
    });
}

}  // namespace flowbench
