// SPDX-FileCopyrightText: © 2026 flowbench contributors
//
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flowbench/errors.hpp"
#include "flowbench/io.hpp"
#include "flowbench/jsonutil.hpp"
#include "flowbench/numeric.hpp"

namespace flowbench {

/// On-chip schedulable resource kinds across the supported architectures:
/// PE (wafer-scale engines), PCU/PMU (reconfigurable dataflow units),
/// tile (IPUs). Enumerator order fixes the tie-break when a trace covers
/// several kinds.
enum class ResourceKind { PE, PCU, PMU, tile };

inline const char* to_string(ResourceKind k) {
    switch (k) {
        case ResourceKind::PE: return "PE";
        case ResourceKind::PCU: return "PCU";
        case ResourceKind::PMU: return "PMU";
        case ResourceKind::tile: return "tile";
    }
    throw InternalError("unhandled resource kind");
}

inline ResourceKind resource_kind_from_string(const std::string& s) {
    if (s == "PE") return ResourceKind::PE;
    if (s == "PCU") return ResourceKind::PCU;
    if (s == "PMU") return ResourceKind::PMU;
    if (s == "tile") return ResourceKind::tile;
    throw ValidationError("unknown resource kind \"" + s + "\"");
}

/// Per-chip resource totals, memory levels, bandwidths and peak compute.
/// Instances are immutable after load; the registry is read-only shared
/// state.
struct HardwareSpec {
    std::string name;
    std::map<ResourceKind, std::int64_t> resource_totals;
    std::int64_t onchip_memory_bytes = 0;
    std::optional<double> shared_bw_bytes_per_s;
    std::optional<double> global_bw_bytes_per_s;
    std::map<std::string, double> peak_flops_per_s;  // keyed by precision label
    std::int64_t devices_per_node = 1;
    std::string notes;

    void validate() const {
        if (name.empty()) throw ValidationError("hardware spec: name must be non-empty");
        if (resource_totals.empty()) {
            throw ValidationError(name + ": resource_totals must list at least one resource kind");
        }
        for (const auto& [kind, count] : resource_totals) {
            if (count < 1) {
                throw ValidationError(name + ": resource_totals." + to_string(kind) +
                                      " must be >= 1");
            }
        }
        if (onchip_memory_bytes < 0) {
            throw ValidationError(name + ": onchip_memory_bytes must be >= 0");
        }
        if (shared_bw_bytes_per_s && !(*shared_bw_bytes_per_s >= 0.0)) {
            throw ValidationError(name + ": shared_bw_bytes_per_s must be >= 0");
        }
        if (global_bw_bytes_per_s && !(*global_bw_bytes_per_s > 0.0)) {
            throw ValidationError(name + ": global_bw_bytes_per_s must be > 0");
        }
        if (peak_flops_per_s.empty()) {
            throw ValidationError(name + ": peak_flops_per_s must list at least one precision");
        }
        for (const auto& [label, peak] : peak_flops_per_s) {
            if (!(peak > 0.0)) {
                throw ValidationError(name + ": peak_flops_per_s." + label + " must be > 0");
            }
        }
        if (devices_per_node < 1) {
            throw ValidationError(name + ": devices_per_node must be >= 1");
        }
    }

    double peak_for(const std::string& precision) const {
        const auto it = peak_flops_per_s.find(precision);
        if (it == peak_flops_per_s.end()) {
            throw ValidationError(name + ": unknown precision label \"" + precision + "\"");
        }
        return it->second;
    }

    double global_bw_or_throw() const {
        if (!global_bw_bytes_per_s) {
            throw ValidationError(name + ": global_bw_bytes_per_s is not set; supply global_bw " +
                                  "via a spec file override to enable roofline analysis");
        }
        return *global_bw_bytes_per_s;
    }
};

enum class RooflineRegime { compute_bound, memory_bound };

inline const char* to_string(RooflineRegime r) {
    return r == RooflineRegime::compute_bound ? "compute-bound" : "memory-bound";
}

/// One workload point against a roofline ceiling: attainable performance is
/// min(peak, ai * global bandwidth); points at or above the ridge count as
/// compute-bound.
struct RooflinePoint {
    double ai = 0.0;
    double attainable_flops = 0.0;
    std::optional<double> achieved_flops;
    RooflineRegime regime = RooflineRegime::memory_bound;
};

inline double ridge_point(const HardwareSpec& spec, const std::string& precision) {
    return spec.peak_for(precision) / spec.global_bw_or_throw();
}

inline RooflinePoint attainable(const HardwareSpec& spec, const std::string& precision, double ai,
                                std::optional<double> achieved = std::nullopt) {
    if (!(ai >= 0.0)) throw ValidationError("arithmetic intensity must be >= 0");
    const double peak = spec.peak_for(precision);
    const double bw = spec.global_bw_or_throw();
    RooflinePoint p;
    p.ai = ai;
    const double slope = ai * bw;
    p.attainable_flops = slope < peak ? slope : peak;
    p.regime = ai >= peak / bw ? RooflineRegime::compute_bound : RooflineRegime::memory_bound;
    p.achieved_flops = achieved;
    return p;
}

// ---------------------------------------------------------------------------
// Spec-file serialization (JSON; grammar documented in docs/formats.md).
// ---------------------------------------------------------------------------

inline HardwareSpec hardware_spec_from_json(const json& doc, const std::string& what) {
    require_type(doc, json::value_t::object, what);
    reject_unknown_fields(doc,
                          {"name", "resource_totals", "onchip_memory_bytes",
                           "shared_bw_bytes_per_s", "global_bw_bytes_per_s", "peak_flops_per_s",
                           "devices_per_node", "notes"},
                          what);
    HardwareSpec spec;
    spec.name = get_string(doc, "name", what);

    const json& totals = require_field(doc, "resource_totals", what);
    require_type(totals, json::value_t::object, what + ".resource_totals");
    for (const auto& [key, value] : totals.items()) {
        const ResourceKind kind = resource_kind_from_string(key);
        spec.resource_totals[kind] = get_int(value, what + ".resource_totals." + key);
    }

    if (const auto it = doc.find("onchip_memory_bytes"); it != doc.end() && !it->is_null()) {
        const double bytes = get_bytes_quantity(*it, what + ".onchip_memory_bytes");
        spec.onchip_memory_bytes = static_cast<std::int64_t>(bytes);
    }
    if (const auto it = doc.find("shared_bw_bytes_per_s"); it != doc.end() && !it->is_null()) {
        spec.shared_bw_bytes_per_s = get_bandwidth_quantity(*it, what + ".shared_bw_bytes_per_s");
    }
    if (const auto it = doc.find("global_bw_bytes_per_s"); it != doc.end() && !it->is_null()) {
        spec.global_bw_bytes_per_s = get_bandwidth_quantity(*it, what + ".global_bw_bytes_per_s");
    } else {
        throw ValidationError(what + ": required field missing: global_bw_bytes_per_s " +
                              "(global_bw must be supplied)");
    }

    const json& peaks = require_field(doc, "peak_flops_per_s", what);
    require_type(peaks, json::value_t::object, what + ".peak_flops_per_s");
    for (const auto& [label, value] : peaks.items()) {
        spec.peak_flops_per_s[label] = get_flops_quantity(value, what + ".peak_flops_per_s." + label);
    }

    if (const auto it = doc.find("devices_per_node"); it != doc.end() && !it->is_null()) {
        spec.devices_per_node = get_int(*it, what + ".devices_per_node");
    }
    if (const auto it = doc.find("notes"); it != doc.end() && !it->is_null()) {
        require_type(*it, json::value_t::string, what + ".notes");
        spec.notes = it->get<std::string>();
    }

    spec.validate();
    return spec;
}

inline HardwareSpec load_hardware_spec(std::string_view text,
                                       const std::string& what = "hardware spec") {
    return hardware_spec_from_json(parse_json(text, what), what);
}

inline json hardware_spec_to_json(const HardwareSpec& spec) {
    json doc;
    doc["name"] = spec.name;
    json totals = json::object();
    for (const auto& [kind, count] : spec.resource_totals) totals[to_string(kind)] = count;
    doc["resource_totals"] = totals;
    doc["onchip_memory_bytes"] = spec.onchip_memory_bytes;
    if (spec.shared_bw_bytes_per_s) doc["shared_bw_bytes_per_s"] = *spec.shared_bw_bytes_per_s;
    if (spec.global_bw_bytes_per_s) doc["global_bw_bytes_per_s"] = *spec.global_bw_bytes_per_s;
    json peaks = json::object();
    for (const auto& [label, peak] : spec.peak_flops_per_s) peaks[label] = peak;
    doc["peak_flops_per_s"] = peaks;
    doc["devices_per_node"] = spec.devices_per_node;
    if (!spec.notes.empty()) doc["notes"] = spec.notes;
    return doc;
}

inline std::string emit_hardware_spec(const HardwareSpec& spec) {
    return hardware_spec_to_json(spec).dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Builtin presets. Resource counts, memory sizes and fabric bandwidths come
// from vendor datasheets; peak FLOP/s values that vendors do not publish are
// back-derived from published achieved-TFLOP/s and efficiency figures and are
// tagged "derived" in the notes so users know to override them when better
// numbers are available.
// ---------------------------------------------------------------------------

inline std::vector<std::string> builtin_spec_names() {
    return {"wse2", "sn30-rdu", "bow2000-ipu"};
}

inline HardwareSpec builtin_spec(const std::string& name) {
    HardwareSpec spec;
    if (name == "wse2") {
        spec.name = "wse2";
        spec.resource_totals[ResourceKind::PE] = 850000;
        spec.onchip_memory_bytes = 40LL * (1LL << 30);  // 40 GiB uniform on-chip SRAM
        spec.shared_bw_bytes_per_s = 20e15;             // 20 PB/s on-chip memory bandwidth
        spec.global_bw_bytes_per_s = 20e15;  // on-chip memory doubles as the global tier
        spec.peak_flops_per_s["fp16"] = 1.69e15;
        spec.devices_per_node = 1;
        spec.notes =
            "Wafer-scale engine, one device per system. PE count, 40GiB on-chip memory and "
            "20PB/s memory bandwidth from the vendor datasheet. fp16 peak is derived: "
            "338 TFLOP/s achieved at ~20% compute efficiency; override if the vendor "
            "publishes an official figure.";
        return spec;
    }
    if (name == "sn30-rdu") {
        spec.name = "sn30-rdu";
        spec.resource_totals[ResourceKind::PCU] = 640;  // 4 tiles x 160 PCUs
        spec.resource_totals[ResourceKind::PMU] = 640;  // 4 tiles x 160 PMUs
        spec.onchip_memory_bytes = 0;  // aggregate PMU capacity not published; override to use
        spec.global_bw_bytes_per_s = 0.2e12;  // off-chip DDR, 0.2 TB/s
        spec.peak_flops_per_s["bf16"] = 2.782e14;
        spec.devices_per_node = 2;  // two RDUs per SN30 node
        spec.notes =
            "Reconfigurable dataflow unit; two per node. PCU/PMU totals are 4 tiles x 160 "
            "units. bf16 peak is derived: 50.64 TFLOP/s achieved at 18.2% peak compute "
            "efficiency; override if the vendor publishes an official figure.";
        return spec;
    }
    if (name == "bow2000-ipu") {
        spec.name = "bow2000-ipu";
        spec.resource_totals[ResourceKind::tile] = 1472;
        spec.onchip_memory_bytes = 1472LL * 64 * 1024;  // 64 KiB per tile
        spec.shared_bw_bytes_per_s = 8e12;              // all-to-all exchange, 8 TB/s
        spec.global_bw_bytes_per_s = std::nullopt;  // external DDR bandwidth not published
        spec.peak_flops_per_s["fp16"] = 3.488e14;
        spec.devices_per_node = 4;  // four IPUs per Bow-2000 system
        spec.notes =
            "IPU with 1,472 tiles of 64KiB each and an 8TB/s exchange. The external DDR "
            "bandwidth is not published, so global_bw_bytes_per_s is unset and must be "
            "supplied for roofline analysis. fp16 peak is derived: 143 TFLOP/s achieved at "
            "41% peak compute efficiency; override if the vendor publishes an official "
            "figure.";
        return spec;
    }
    throw ValidationError("unknown builtin hardware spec \"" + name + "\"");
}

inline bool is_builtin_spec(const std::string& name) {
    for (const auto& n : builtin_spec_names()) {
        if (n == name) return true;
    }
    return false;
}

/// Resolve --spec arguments: a builtin preset name, otherwise a path to a
/// spec file.
inline HardwareSpec resolve_hardware_spec(const std::string& name_or_path) {
    if (is_builtin_spec(name_or_path)) return builtin_spec(name_or_path);
    const std::string text = read_file(name_or_path);
    return load_hardware_spec(text, name_or_path);
}

/// Pick the spec for a trace: a platform naming a builtin preset binds to
/// that preset, so one manifest can mix traces from several machines;
/// anything else falls back to the manifest's (or CLI's) hardware.
inline HardwareSpec spec_for_platform(const std::string& platform, const HardwareSpec& fallback) {
    if (is_builtin_spec(platform)) return builtin_spec(platform);
    return fallback;
}

}  // namespace flowbench
