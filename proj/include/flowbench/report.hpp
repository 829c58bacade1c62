// SPDX-FileCopyrightText: © 2026 flowbench contributors
//
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flowbench/errors.hpp"
#include "flowbench/hardware.hpp"
#include "flowbench/io.hpp"
#include "flowbench/jsonutil.hpp"
#include "flowbench/manifest.hpp"
#include "flowbench/numeric.hpp"
#include "flowbench/roofline_plot.hpp"
#include "flowbench/tier1.hpp"
#include "flowbench/tier2.hpp"
#include "flowbench/trace.hpp"
#include "flowbench/version.hpp"
#include "flowbench/workload.hpp"

namespace flowbench {

struct ReportOptions {
    bool tier1 = true;
    bool tier2 = true;
    bool roofline = true;
    std::optional<std::string> precision;  // for ridge table and explicit ai markers
};

struct ReportArtifacts {
    json report;
    std::string markdown;
    std::optional<std::string> roofline_csv;
    std::optional<std::string> roofline_svg;
};

inline std::string render_markdown(const json& report);

namespace detail {

inline json roofline_point_to_json(const RooflinePoint& p) {
    json doc;
    doc["ai"] = p.ai;
    doc["attainable_flops"] = p.attainable_flops;
    if (p.achieved_flops) doc["achieved_flops"] = *p.achieved_flops;
    doc["regime"] = to_string(p.regime);
    return doc;
}

inline json tier1_to_json(const Tier1Metrics& m) {
    json doc;
    json alloc = json::object();
    for (const auto& [kind, value] : m.allocation_ratio) alloc[to_string(kind)] = value;
    doc["allocation_ratio"] = alloc;
    if (!m.weighted_allocation.empty()) {
        json weighted = json::object();
        for (const auto& [kind, value] : m.weighted_allocation) weighted[to_string(kind)] = value;
        doc["weighted_allocation"] = weighted;
    }
    if (m.load_imbalance) {
        doc["load_imbalance"] = *m.load_imbalance;
        doc["load_imbalance_kind"] = to_string(*m.load_imbalance_kind);
    }
    if (m.weighted_li) doc["weighted_li"] = *m.weighted_li;
    if (m.memory_fractions) {
        doc["memory_fractions"] = {{"config", m.memory_fractions->config},
                                   {"training", m.memory_fractions->training},
                                   {"total", m.memory_fractions->total}};
    }
    if (m.compute_efficiency) {
        doc["compute_efficiency"] = std::min(*m.compute_efficiency, 1.0);
    }
    if (m.compute_utilization) doc["compute_utilization"] = *m.compute_utilization;
    if (m.arithmetic_intensity) doc["arithmetic_intensity"] = *m.arithmetic_intensity;
    if (m.roofline) doc["roofline"] = roofline_point_to_json(*m.roofline);
    if (!m.not_computable.empty()) doc["not_computable"] = m.not_computable;
    if (!m.warnings.empty()) doc["warnings"] = m.warnings;
    return doc;
}

inline json tier2_to_json(const Tier2Metrics& m) {
    json doc = json::object();
    if (!m.dp_scaling.empty()) {
        json runs = json::array();
        for (const auto& r : m.dp_scaling) {
            json run;
            run["strategy"] = to_string(r.strategy);
            run["degree"] = r.degree;
            run["throughput"] = r.throughput;
            run["speedup"] = r.speedup;
            run["efficiency"] = r.efficiency;
            if (!r.commentary.empty()) run["commentary"] = r.commentary;
            runs.push_back(run);
        }
        doc["dp_scaling"] = runs;
    }
    if (m.weight_streaming_penalty) {
        doc["weight_streaming_penalty"] = *m.weight_streaming_penalty;
    }
    if (!m.tp_steps.empty()) {
        json steps = json::array();
        for (const auto& s : m.tp_steps) {
            steps.push_back({{"from_degree", s.from_degree},
                             {"to_degree", s.to_degree},
                             {"from_throughput", s.from_throughput},
                             {"to_throughput", s.to_throughput},
                             {"degradation", s.degradation},
                             {"crosses_machine_boundary", s.crosses_machine_boundary}});
        }
        doc["tp_degradation"] = steps;
    }
    if (!m.pp_runs.empty()) {
        json runs = json::array();
        for (const auto& r : m.pp_runs) {
            runs.push_back({{"degree", r.degree},
                            {"stage_layers", r.stage_layers},
                            {"bottleneck_layers", r.bottleneck_layers},
                            {"throughput", r.throughput}});
        }
        doc["pp_runs"] = runs;
    }
    if (m.pp_recommendation) {
        json plan;
        plan["stage_layers"] = m.pp_recommendation->stage_layers;
        if (m.pp_recommendation->embedding_stage) {
            plan["embedding_stage"] =
                static_cast<std::int64_t>(*m.pp_recommendation->embedding_stage);
        }
        plan["predicted_relative_throughput"] = m.pp_recommendation->predicted_relative_throughput;
        doc["pp_recommendation"] = plan;
    }
    if (!m.batch_sweep.empty()) {
        json sweep = json::array();
        for (const auto& p : m.batch_sweep) {
            sweep.push_back({{"batch", p.batch}, {"throughput", p.throughput}});
        }
        doc["batch_sweep"] = sweep;
        doc["batch_knee_theta"] = m.batch_knee_theta;
        if (m.batch_knee) {
            doc["batch_knee"] = *m.batch_knee;
        } else {
            doc["batch_knee"] = nullptr;  // searched, no saturation point found
        }
    }
    if (!m.precision_gains.empty()) {
        json gains = json::array();
        for (const auto& g : m.precision_gains) {
            gains.push_back({{"platform", g.platform},
                             {"base_precision", g.base_precision},
                             {"optimized_precision", g.optimized_precision},
                             {"base_throughput", g.base_throughput},
                             {"optimized_throughput", g.optimized_throughput},
                             {"gain", g.gain}});
        }
        doc["precision_gains"] = gains;
    }
    if (!m.not_computable.empty()) doc["not_computable"] = m.not_computable;
    if (!m.warnings.empty()) doc["warnings"] = m.warnings;
    return doc;
}

inline std::string point_label(const std::string& path) {
    return std::filesystem::path(path).stem().string();
}

}  // namespace detail

/// Build the structured report (and optional roofline artifacts) for a
/// manifest. The markdown view is rendered from the finished JSON document,
/// so every number in report.md appears byte-identically in report.json.
inline ReportArtifacts build_report(const RunManifest& manifest, const std::string& manifest_path,
                                    const std::string& manifest_text,
                                    const ReportOptions& options = {}) {
    ReportArtifacts out;
    json& report = out.report;

    report["tool"] = {{"name", kToolName}, {"version", kToolVersion}};

    // Load traces and record input digests.
    struct Loaded {
        TraceRef ref;
        TraceSet trace;
        std::string digest;
    };
    std::vector<Loaded> loaded;
    json inputs;
    inputs["manifest"] = {{"path", manifest_path}, {"fnv1a64", fnv1a64_hex(manifest_text)}};
    json trace_inputs = json::array();
    for (const auto& ref : manifest.traces) {
        const std::string text = read_file(ref.resolved_path);
        Loaded item{ref, parse_trace(text, ref.path), fnv1a64_hex(text)};
        if (!item.trace.metadata.workload && manifest.workload) {
            item.trace.metadata.workload = manifest.workload;
        }
        if (item.trace.metadata.granularity.empty() && !manifest.options.li_granularity.empty()) {
            item.trace.metadata.granularity = manifest.options.li_granularity;
        }
        trace_inputs.push_back({{"path", ref.path},
                                {"role", ref.role.str()},
                                {"fnv1a64", item.digest},
                                {"provenance", to_string(item.trace.metadata.provenance)}});
        loaded.push_back(std::move(item));
    }
    inputs["traces"] = trace_inputs;
    report["inputs"] = inputs;

    const HardwareSpec spec = manifest.resolve_hardware();
    json hardware = hardware_spec_to_json(spec);
    if (spec.global_bw_bytes_per_s) {
        json ridges = json::object();
        for (const auto& [label, peak] : spec.peak_flops_per_s) {
            (void)peak;
            ridges[label] = ridge_point(spec, label);
        }
        hardware["ridge_points"] = ridges;
    }
    report["hardware"] = hardware;

    // Workload derivations from the manifest's model block.
    const ActivationModel activation{manifest.options.c_act,
                                     manifest.options.include_attention_scores};
    if (manifest.workload) {
        const ModelConfig& cfg = *manifest.workload;
        const WorkloadProfile profile =
            workload_profile(cfg, activation, manifest.options.bytes_per_param);
        json workload;
        workload["config"] = model_config_to_json(cfg);
        workload["param_count"] = profile.param_count;
        workload["param_count_formula"] = param_count_formula(cfg);
        workload["block_param_count"] = block_param_count(cfg);
        workload["training_flops_per_step"] = profile.flops_per_step;
        workload["activation_bytes"] = profile.activation_bytes;
        workload["weight_traffic_bytes"] = profile.weight_traffic_bytes;
        workload["arithmetic_intensity"] = profile.arithmetic_intensity;
        report["workload"] = workload;
    }

    std::vector<std::string> global_not_computable;
    std::vector<std::string> global_warnings;
    std::vector<NamedRooflinePoint> points;

    // Tier-1 metrics, one entry per tier1-role trace, in manifest order.
    if (options.tier1) {
        Tier1Options tier1_options;
        tier1_options.activation = activation;
        tier1_options.bytes_per_param = manifest.options.bytes_per_param;
        json tier1 = json::array();
        for (const auto& item : loaded) {
            if (item.ref.role.kind != TraceRole::Kind::tier1) continue;
            const HardwareSpec trace_spec =
                spec_for_platform(item.trace.metadata.platform, spec);
            const Tier1Metrics metrics = compute_tier1(item.trace, trace_spec, tier1_options);
            json entry = detail::tier1_to_json(metrics);
            entry["trace"] = item.ref.path;
            entry["platform"] = item.trace.metadata.platform;
            entry["provenance"] = to_string(item.trace.metadata.provenance);
            if (!item.trace.metadata.granularity.empty()) {
                entry["granularity"] = item.trace.metadata.granularity;
            }
            if (metrics.roofline) {
                points.push_back({detail::point_label(item.ref.path), *metrics.roofline});
            }
            tier1.push_back(std::move(entry));
        }
        report["tier1"] = tier1;
    }

    // Tier-2 metrics over the sweep groups.
    if (options.tier2) {
        std::map<std::string, std::vector<TraceSet>> sweeps;
        for (const auto& item : loaded) {
            if (item.ref.role.kind != TraceRole::Kind::sweep) continue;
            sweeps[item.ref.role.sweep_name].push_back(item.trace);
        }
        Tier2Options tier2_options;
        tier2_options.theta = manifest.options.theta;
        const Tier2Metrics metrics = compute_tier2(sweeps, spec, tier2_options);
        report["tier2"] = detail::tier2_to_json(metrics);
    }

    // Roofline artifacts: per-workload markers plus explicit ai markers.
    if (options.roofline) {
        std::string precision = options.precision.value_or("");
        if (precision.empty() && !spec.peak_flops_per_s.empty()) {
            precision = spec.peak_flops_per_s.begin()->first;
        }
        if (!spec.global_bw_bytes_per_s) {
            global_not_computable.push_back(
                "roofline plot: hardware spec " + spec.name +
                " has no global_bw_bytes_per_s; supply global_bw to enable it");
        } else if (spec.peak_flops_per_s.find(precision) == spec.peak_flops_per_s.end()) {
            global_not_computable.push_back("roofline plot: no peak for precision " + precision);
        } else {
            for (const double ai : manifest.options.ai_points) {
                points.push_back({"ai=" + json(ai).dump(), attainable(spec, precision, ai)});
            }
            json point_docs = json::array();
            for (const auto& p : points) {
                json doc = detail::roofline_point_to_json(p.point);
                doc["label"] = p.label;
                point_docs.push_back(doc);
            }
            report["roofline"] = {{"precision", precision}, {"points", point_docs}};
            out.roofline_csv = roofline_points_csv(points);
            out.roofline_svg = roofline_svg(spec, precision, points);
        }
    }

    if (!global_not_computable.empty()) report["not_computable"] = global_not_computable;
    if (!global_warnings.empty()) report["warnings"] = global_warnings;
    out.markdown = render_markdown(report);
    return out;
}

// ---------------------------------------------------------------------------
// Markdown rendering. Only values from the report JSON are used; numeric
// cells are the JSON scalars dumped verbatim.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string cell(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

inline std::string cell_or(const json& obj, const char* key, const std::string& fallback = "-") {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return fallback;
    return cell(*it);
}

inline void bullet_list(std::string& md, const json& obj, const char* key, const char* heading) {
    const auto it = obj.find(key);
    if (it == obj.end() || !it->is_array() || it->empty()) return;
    md += std::string(heading) + "\n\n";
    for (const auto& entry : *it) md += "- " + cell(entry) + "\n";
    md += "\n";
}

}  // namespace detail

inline std::string render_markdown(const json& report) {
    using detail::cell;
    using detail::cell_or;
    std::string md;
    md += "# flowbench report\n\n";
    if (report.contains("tool")) {
        md += "Generated by " + cell(report["tool"]["name"]) + " " +
              cell(report["tool"]["version"]) + ".\n\n";
    }

    if (report.contains("inputs")) {
        const json& inputs = report["inputs"];
        md += "## Inputs\n\n";
        md += "| Path | Role | FNV-1a 64 digest | Provenance |\n";
        md += "| --- | --- | --- | --- |\n";
        md += "| " + cell(inputs["manifest"]["path"]) + " | manifest | " +
              cell(inputs["manifest"]["fnv1a64"]) + " | - |\n";
        for (const auto& t : inputs["traces"]) {
            md += "| " + cell(t["path"]) + " | " + cell(t["role"]) + " | " + cell(t["fnv1a64"]) +
                  " | " + cell(t["provenance"]) + " |\n";
        }
        md += "\n";
    }

    if (report.contains("hardware")) {
        const json& hw = report["hardware"];
        md += "## Hardware: " + cell(hw["name"]) + "\n\n";
        md += "| Property | Value |\n| --- | --- |\n";
        md += "| devices_per_node | " + cell_or(hw, "devices_per_node") + " |\n";
        md += "| onchip_memory_bytes | " + cell_or(hw, "onchip_memory_bytes") + " |\n";
        md += "| shared_bw_bytes_per_s | " + cell_or(hw, "shared_bw_bytes_per_s") + " |\n";
        md += "| global_bw_bytes_per_s | " + cell_or(hw, "global_bw_bytes_per_s", "not set") +
              " |\n";
        if (hw.contains("resource_totals")) {
            for (const auto& [kind, total] : hw["resource_totals"].items()) {
                md += "| resource_totals." + kind + " | " + cell(total) + " |\n";
            }
        }
        if (hw.contains("peak_flops_per_s")) {
            for (const auto& [label, peak] : hw["peak_flops_per_s"].items()) {
                md += "| peak_flops_per_s." + label + " | " + cell(peak) + " |\n";
            }
        }
        if (hw.contains("ridge_points")) {
            for (const auto& [label, ridge] : hw["ridge_points"].items()) {
                md += "| ridge_point." + label + " | " + cell(ridge) + " |\n";
            }
        }
        md += "\n";
    }

    if (report.contains("workload")) {
        const json& w = report["workload"];
        md += "## Workload\n\n";
        md += "| Quantity | Value |\n| --- | --- |\n";
        md += "| param_count | " + cell_or(w, "param_count") + " |\n";
        md += "| block_param_count | " + cell_or(w, "block_param_count") + " |\n";
        md += "| training_flops_per_step | " + cell_or(w, "training_flops_per_step") + " |\n";
        md += "| activation_bytes | " + cell_or(w, "activation_bytes") + " |\n";
        md += "| weight_traffic_bytes | " + cell_or(w, "weight_traffic_bytes") + " |\n";
        md += "| arithmetic_intensity | " + cell_or(w, "arithmetic_intensity") + " |\n";
        md += "\nCounting rule: " + cell_or(w, "param_count_formula", "") + "\n\n";
    }

    if (report.contains("tier1")) {
        md += "## Tier 1 metrics\n\n";
        for (const auto& entry : report["tier1"]) {
            md += "### " + cell_or(entry, "trace", "trace") + "\n\n";
            md += "Platform " + cell_or(entry, "platform") + ", provenance " +
                  cell_or(entry, "provenance") + ", granularity " +
                  cell_or(entry, "granularity") + ".\n\n";
            md += "| Metric | Value |\n| --- | --- |\n";
            if (entry.contains("allocation_ratio")) {
                for (const auto& [kind, v] : entry["allocation_ratio"].items()) {
                    md += "| allocation_ratio." + kind + " | " + cell(v) + " |\n";
                }
            }
            if (entry.contains("weighted_allocation")) {
                for (const auto& [kind, v] : entry["weighted_allocation"].items()) {
                    md += "| weighted_allocation." + kind + " | " + cell(v) + " |\n";
                }
            }
            if (entry.contains("load_imbalance")) {
                md += "| load_imbalance (" + cell_or(entry, "load_imbalance_kind") + ") | " +
                      cell(entry["load_imbalance"]) + " |\n";
            }
            if (entry.contains("weighted_li")) {
                md += "| weighted_li | " + cell(entry["weighted_li"]) + " |\n";
            }
            if (entry.contains("memory_fractions")) {
                const json& f = entry["memory_fractions"];
                md += "| memory_fractions.config | " + cell(f["config"]) + " |\n";
                md += "| memory_fractions.training | " + cell(f["training"]) + " |\n";
                md += "| memory_fractions.total | " + cell(f["total"]) + " |\n";
            }
            if (entry.contains("compute_efficiency")) {
                md += "| compute_efficiency | " + cell(entry["compute_efficiency"]) + " |\n";
            }
            if (entry.contains("compute_utilization")) {
                md += "| compute_utilization | " + cell(entry["compute_utilization"]) + " |\n";
            }
            if (entry.contains("arithmetic_intensity")) {
                md += "| arithmetic_intensity | " + cell(entry["arithmetic_intensity"]) + " |\n";
            }
            if (entry.contains("roofline")) {
                const json& r = entry["roofline"];
                md += "| roofline.attainable_flops | " + cell(r["attainable_flops"]) + " |\n";
                if (r.contains("achieved_flops")) {
                    md += "| roofline.achieved_flops | " + cell(r["achieved_flops"]) + " |\n";
                }
                md += "| roofline.regime | " + cell(r["regime"]) + " |\n";
            }
            md += "\n";
            detail::bullet_list(md, entry, "not_computable", "Not computable:");
            detail::bullet_list(md, entry, "warnings", "Warnings:");
        }
    }

    if (report.contains("tier2")) {
        const json& t2 = report["tier2"];
        md += "## Tier 2 metrics\n\n";
        if (t2.contains("dp_scaling")) {
            md += "### Data-parallel scaling\n\n";
            md += "| Strategy | Degree | Throughput (tokens/s) | Speedup | Efficiency |\n";
            md += "| --- | --- | --- | --- | --- |\n";
            for (const auto& r : t2["dp_scaling"]) {
                md += "| " + cell(r["strategy"]) + " | " + cell(r["degree"]) + " | " +
                      cell(r["throughput"]) + " | " + cell(r["speedup"]) + " | " +
                      cell(r["efficiency"]) + " |\n";
            }
            md += "\n";
        }
        if (t2.contains("weight_streaming_penalty")) {
            md += "Weight-streaming penalty: " + cell(t2["weight_streaming_penalty"]) + "\n\n";
        }
        if (t2.contains("tp_degradation")) {
            md += "### Tensor-parallel degradation\n\n";
            md += "| From degree | To degree | From (tokens/s) | To (tokens/s) | Degradation | "
                  "Crosses machine boundary |\n";
            md += "| --- | --- | --- | --- | --- | --- |\n";
            for (const auto& s : t2["tp_degradation"]) {
                md += "| " + cell(s["from_degree"]) + " | " + cell(s["to_degree"]) + " | " +
                      cell(s["from_throughput"]) + " | " + cell(s["to_throughput"]) + " | " +
                      cell(s["degradation"]) + " | " + cell(s["crosses_machine_boundary"]) +
                      " |\n";
            }
            md += "\n";
        }
        if (t2.contains("pp_runs")) {
            md += "### Pipeline-parallel runs\n\n";
            md += "| Degree | Stage layers | Bottleneck layers | Throughput (tokens/s) |\n";
            md += "| --- | --- | --- | --- |\n";
            for (const auto& r : t2["pp_runs"]) {
                md += "| " + cell(r["degree"]) + " | " + cell(r["stage_layers"]) + " | " +
                      cell(r["bottleneck_layers"]) + " | " + cell(r["throughput"]) + " |\n";
            }
            md += "\n";
        }
        if (t2.contains("pp_recommendation")) {
            const json& plan = t2["pp_recommendation"];
            md += "Pipeline recommendation: stage_layers " + cell(plan["stage_layers"]);
            if (plan.contains("embedding_stage")) {
                md += ", embedding stage " + cell(plan["embedding_stage"]);
            }
            md += ", predicted relative throughput " +
                  cell(plan["predicted_relative_throughput"]) + "\n\n";
        }
        if (t2.contains("batch_sweep")) {
            md += "### Batch-size sweep\n\n";
            md += "| Batch | Throughput (tokens/s) |\n| --- | --- |\n";
            for (const auto& p : t2["batch_sweep"]) {
                md += "| " + cell(p["batch"]) + " | " + cell(p["throughput"]) + " |\n";
            }
            md += "\nbatch_knee (theta " + cell_or(t2, "batch_knee_theta") + "): " +
                  cell_or(t2, "batch_knee", "none found") + "\n\n";
        }
        if (t2.contains("precision_gains")) {
            md += "### Precision gains\n\n";
            md += "| Platform | Base | Optimized | Base (tokens/s) | Optimized (tokens/s) | "
                  "Gain |\n";
            md += "| --- | --- | --- | --- | --- | --- |\n";
            for (const auto& g : t2["precision_gains"]) {
                md += "| " + cell(g["platform"]) + " | " + cell(g["base_precision"]) + " | " +
                      cell(g["optimized_precision"]) + " | " + cell(g["base_throughput"]) +
                      " | " + cell(g["optimized_throughput"]) + " | " + cell(g["gain"]) + " |\n";
            }
            md += "\n";
        }
        detail::bullet_list(md, t2, "not_computable", "Not computable:");
        detail::bullet_list(md, t2, "warnings", "Warnings:");
    }

    if (report.contains("roofline")) {
        const json& roofline = report["roofline"];
        md += "## Roofline points (" + cell_or(roofline, "precision") + ")\n\n";
        md += "| Label | AI | Attainable FLOP/s | Achieved FLOP/s | Regime |\n";
        md += "| --- | --- | --- | --- | --- |\n";
        for (const auto& p : roofline["points"]) {
            md += "| " + cell_or(p, "label") + " | " + cell(p["ai"]) + " | " +
                  cell(p["attainable_flops"]) + " | " + cell_or(p, "achieved_flops") + " | " +
                  cell(p["regime"]) + " |\n";
        }
        md += "\n";
    }

    detail::bullet_list(md, report, "not_computable", "Not computable:");
    detail::bullet_list(md, report, "warnings", "Warnings:");
    return md;
}

/// Serialize the report JSON deterministically (sorted keys, two-space
/// indent, shortest round-trip numbers, trailing newline).
inline std::string dump_report(const json& report) { return report.dump(2) + "\n"; }

}  // namespace flowbench
