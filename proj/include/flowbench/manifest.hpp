// SPDX-FileCopyrightText: © 2026 flowbench contributors
//
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flowbench/errors.hpp"
#include "flowbench/hardware.hpp"
#include "flowbench/jsonutil.hpp"
#include "flowbench/trace.hpp"
#include "flowbench/workload.hpp"

namespace flowbench {

/// A trace's role inside a manifest: input to the Tier-1 per-trace metrics,
/// or member of a named Tier-2 sweep ("sweep:<name>").
struct TraceRole {
    enum class Kind { tier1, sweep };
    Kind kind = Kind::tier1;
    std::string sweep_name;  // set when kind == sweep

    static TraceRole parse(const std::string& text) {
        TraceRole role;
        if (text == "tier1") {
            role.kind = Kind::tier1;
            return role;
        }
        constexpr std::string_view prefix = "sweep:";
        if (text.size() > prefix.size() && std::string_view(text).substr(0, prefix.size()) == prefix) {
            role.kind = Kind::sweep;
            role.sweep_name = text.substr(prefix.size());
            return role;
        }
        throw ValidationError("trace role must be \"tier1\" or \"sweep:<name>\", got \"" + text +
                              "\"");
    }

    std::string str() const {
        return kind == Kind::tier1 ? std::string("tier1") : "sweep:" + sweep_name;
    }
};

struct TraceRef {
    std::string path;           // as written in the manifest (stable across machines)
    std::string resolved_path;  // path to read, resolved against the manifest's directory
    TraceRole role;
};

struct ManifestOptions {
    double theta = 0.10;           // batch-knee threshold per doubling
    std::string li_granularity;    // label recorded in reports when traces carry none
    double c_act = 34.0;           // activation bytes-per-element coefficient
    bool include_attention_scores = false;
    double bytes_per_param = 4.0;  // weight-traffic bytes per parameter for AI
    std::vector<double> ai_points;  // extra roofline markers with no achieved value

    void validate() const {
        if (!(theta > 0.0)) throw ValidationError("options.theta must be > 0");
        if (!(c_act > 0.0)) throw ValidationError("options.c_act must be > 0");
        if (!(bytes_per_param > 0.0)) {
            throw ValidationError("options.bytes_per_param must be > 0");
        }
        for (const double ai : ai_points) {
            if (!(ai >= 0.0)) throw ValidationError("options.ai_points entries must be >= 0");
        }
    }
};

struct RunManifest {
    std::optional<ModelConfig> workload;
    std::optional<std::string> hardware_name;   // builtin preset name or spec-file path
    std::optional<HardwareSpec> hardware_inline;
    std::vector<TraceRef> traces;
    ManifestOptions options;

    bool has_hardware() const { return hardware_name || hardware_inline; }

    HardwareSpec resolve_hardware() const {
        if (hardware_inline) return *hardware_inline;
        if (hardware_name) return resolve_hardware_spec(*hardware_name);
        throw ValidationError("manifest: missing hardware (spec name, path or inline spec)");
    }
};

inline RunManifest load_manifest(std::string_view text, const std::string& what = "manifest") {
    const json doc = parse_json(text, what);
    require_type(doc, json::value_t::object, what);
    reject_unknown_fields(doc, {"workload", "hardware", "traces", "options"}, what);

    RunManifest manifest;
    if (const auto it = doc.find("workload"); it != doc.end() && !it->is_null()) {
        manifest.workload = model_config_from_json(*it, what + ".workload");
    }
    if (const auto it = doc.find("hardware"); it != doc.end() && !it->is_null()) {
        if (it->is_string()) {
            manifest.hardware_name = it->get<std::string>();
        } else if (it->is_object()) {
            manifest.hardware_inline = hardware_spec_from_json(*it, what + ".hardware");
        } else {
            throw ValidationError(what + ".hardware: expected a spec name or an inline spec");
        }
    }
    if (const auto it = doc.find("traces"); it != doc.end() && !it->is_null()) {
        require_type(*it, json::value_t::array, what + ".traces");
        for (const auto& entry : *it) {
            require_type(entry, json::value_t::object, what + ".traces[]");
            reject_unknown_fields(entry, {"path", "role"}, what + ".traces[]");
            TraceRef ref;
            ref.path = get_string(entry, "path", what + ".traces[]");
            ref.resolved_path = ref.path;
            ref.role = TraceRole::parse(get_string(entry, "role", what + ".traces[]"));
            manifest.traces.push_back(std::move(ref));
        }
    }
    if (const auto it = doc.find("options"); it != doc.end() && !it->is_null()) {
        const json& opts = *it;
        require_type(opts, json::value_t::object, what + ".options");
        reject_unknown_fields(opts,
                              {"theta", "li_granularity", "c_act", "include_attention_scores",
                               "bytes_per_param", "ai_points"},
                              what + ".options");
        if (const auto o = opts.find("theta"); o != opts.end()) {
            manifest.options.theta = get_number(*o, what + ".options.theta");
        }
        if (const auto o = opts.find("li_granularity"); o != opts.end()) {
            require_type(*o, json::value_t::string, what + ".options.li_granularity");
            manifest.options.li_granularity = o->get<std::string>();
        }
        if (const auto o = opts.find("c_act"); o != opts.end()) {
            manifest.options.c_act = get_number(*o, what + ".options.c_act");
        }
        if (const auto o = opts.find("include_attention_scores"); o != opts.end()) {
            require_type(*o, json::value_t::boolean, what + ".options.include_attention_scores");
            manifest.options.include_attention_scores = o->get<bool>();
        }
        if (const auto o = opts.find("bytes_per_param"); o != opts.end()) {
            manifest.options.bytes_per_param = get_number(*o, what + ".options.bytes_per_param");
        }
        if (const auto o = opts.find("ai_points"); o != opts.end()) {
            require_type(*o, json::value_t::array, what + ".options.ai_points");
            for (const auto& v : *o) {
                manifest.options.ai_points.push_back(get_number(v, what + ".options.ai_points[]"));
            }
        }
        manifest.options.validate();
    }
    return manifest;
}

/// Load a manifest from disk, resolving relative trace paths (and a relative
/// hardware spec path) against the manifest's own directory.
inline RunManifest load_manifest_file(const std::string& path) {
    RunManifest manifest = load_manifest(read_file(path), path);
    const std::filesystem::path base = std::filesystem::path(path).parent_path();
    for (auto& ref : manifest.traces) {
        const std::filesystem::path p(ref.path);
        if (p.is_relative()) ref.resolved_path = (base / p).lexically_normal().string();
    }
    if (manifest.hardware_name && !is_builtin_spec(*manifest.hardware_name)) {
        const std::filesystem::path p(*manifest.hardware_name);
        if (p.is_relative()) {
            manifest.hardware_name = (base / p).lexically_normal().string();
        }
    }
    return manifest;
}

}  // namespace flowbench
