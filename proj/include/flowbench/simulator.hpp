// SPDX-FileCopyrightText: © 2026 flowbench contributors
//
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "flowbench/errors.hpp"
#include "flowbench/hardware.hpp"
#include "flowbench/tier2.hpp"
#include "flowbench/trace.hpp"
#include "flowbench/workload.hpp"

namespace flowbench {

/// One decoder operator with its forward FLOPs and tensor traffic.
struct OpNode {
    std::string name;
    double flops = 0.0;
    double io_bytes = 0.0;
};

/// The per-layer operator list (identical across decoder layers) plus the
/// layer count; the unit consumed by section partitioning and placement.
struct DecoderGraph {
    std::vector<OpNode> ops;  // one decoder layer, in execution order
    std::int64_t num_layers = 0;
};

inline const std::vector<std::string>& decoder_op_vocabulary() {
    static const std::vector<std::string> kOps = {
        "norm1",     "qkv_proj",   "attn_score", "attn_context", "out_proj", "residual1",
        "norm2",     "mlp_up",     "activation", "mlp_down",     "residual2"};
    return kOps;
}

/// Build the per-layer operator graph. Matrix-multiply FLOPs use the 2mnk
/// rule (bias adds are not counted); elementwise ops use documented
/// per-element constants (norm 5, activation 8, residual 1). io_bytes
/// accounts inputs, outputs and weights at the config's precision.
inline DecoderGraph build_decoder_graph(const ModelConfig& cfg) {
    cfg.validate();
    const double h = static_cast<double>(cfg.hidden_size);
    const double bs = static_cast<double>(cfg.batch_size) * static_cast<double>(cfg.seq_len);
    const double s = static_cast<double>(cfg.seq_len);
    const double n = static_cast<double>(cfg.num_heads);
    const double f = static_cast<double>(ffn_width(cfg));
    const double p = static_cast<double>(cfg.precision_bytes);
    const double bias = cfg.has_bias ? 1.0 : 0.0;

    DecoderGraph graph;
    graph.num_layers = cfg.num_layers;
    const auto add = [&](const char* name, double flops, double io_elements) {
        graph.ops.push_back({name, flops, io_elements * p});
    };
    const double scores = bs * n * s;  // attention-score tensor elements

    add("norm1", 5.0 * bs * h, 2.0 * bs * h + 2.0 * h);
    add("qkv_proj", 2.0 * (3.0 * h) * h * bs, 4.0 * bs * h + 3.0 * h * h + bias * 3.0 * h);
    add("attn_score", 2.0 * bs * s * h, 2.0 * bs * h + scores);
    add("attn_context", 2.0 * bs * s * h, 2.0 * bs * h + scores);
    add("out_proj", 2.0 * h * h * bs, 2.0 * bs * h + h * h + bias * h);
    add("residual1", bs * h, 3.0 * bs * h);
    add("norm2", 5.0 * bs * h, 2.0 * bs * h + 2.0 * h);
    add("mlp_up", 2.0 * h * f * bs, bs * h + bs * f + h * f + bias * f);
    add("activation", 8.0 * bs * f, 2.0 * bs * f);
    add("mlp_down", 2.0 * f * h * bs, bs * f + bs * h + f * h + bias * h);
    add("residual2", bs * h, 3.0 * bs * h);
    return graph;
}

// ---------------------------------------------------------------------------
// Section partitioning (three compilation modes).
// ---------------------------------------------------------------------------

enum class CompileMode { O0, O1, O3 };

inline const char* to_string(CompileMode m) {
    switch (m) {
        case CompileMode::O0: return "O0";
        case CompileMode::O1: return "O1";
        case CompileMode::O3: return "O3";
    }
    throw InternalError("unhandled compile mode");
}

inline CompileMode compile_mode_from_string(const std::string& s) {
    if (s == "O0" || s == "o0") return CompileMode::O0;
    if (s == "O1" || s == "o1") return CompileMode::O1;
    if (s == "O3" || s == "o3") return CompileMode::O3;
    throw ValidationError("unknown compile mode \"" + s + "\" (expected o0, o1 or o3)");
}

struct PlanSection {
    std::string label;
    std::vector<std::string> ops;  // member op names (O0/O1) or per-decoder ops (O3)
    std::optional<std::pair<std::int64_t, std::int64_t>> decoder_range;  // O3: [first, last]
    std::int64_t invocations = 1;
    std::int64_t pcu = 0;
    std::int64_t pmu = 0;
    double flops = 0.0;  // per invocation
};

struct SectionPlan {
    CompileMode mode = CompileMode::O0;
    std::vector<PlanSection> sections;
    std::int64_t total_layers = 0;
};

struct PartitionOptions {
    std::int64_t budget = 640;  // max(PCU, PMU) a section may occupy (O3 only)
    std::int64_t max_splits_per_decoder = 3;
    std::int64_t pcu_per_decoder = 320;  // calibration: compute units a whole decoder wants
    std::int64_t pmu_per_decoder = 320;  // calibration: memory units a whole decoder wants
    /// Fusion map for O1: op name -> module label; unmapped ops stay solo.
    std::map<std::string, std::string> fusion;

    PartitionOptions() {
        for (const char* op : {"qkv_proj", "attn_score", "attn_context", "out_proj"}) {
            fusion[op] = "attention";
        }
        for (const char* op : {"mlp_up", "activation", "mlp_down"}) {
            fusion[op] = "mlp";
        }
    }
};

namespace detail {

struct OpDemand {
    std::int64_t pcu = 0;
    std::int64_t pmu = 0;
};

/// Distribute the calibrated per-decoder unit demand over ops in proportion
/// to their FLOPs (PCU) and traffic (PMU); every op needs at least one unit.
inline std::vector<OpDemand> op_demands(const DecoderGraph& graph,
                                        const PartitionOptions& options) {
    double total_flops = 0.0;
    double total_io = 0.0;
    for (const auto& op : graph.ops) {
        total_flops += op.flops;
        total_io += op.io_bytes;
    }
    if (!(total_flops > 0.0) || !(total_io > 0.0)) {
        throw ValidationError("partition_sections: decoder graph has zero total flops or traffic");
    }
    std::vector<OpDemand> demands;
    demands.reserve(graph.ops.size());
    for (const auto& op : graph.ops) {
        OpDemand d;
        d.pcu = std::max<std::int64_t>(
            1, std::llround(op.flops / total_flops *
                            static_cast<double>(options.pcu_per_decoder)));
        d.pmu = std::max<std::int64_t>(
            1, std::llround(op.io_bytes / total_io *
                            static_cast<double>(options.pmu_per_decoder)));
        demands.push_back(d);
    }
    return demands;
}

}  // namespace detail

inline SectionPlan partition_sections(const DecoderGraph& graph, CompileMode mode,
                                      const PartitionOptions& options = {}) {
    if (graph.ops.empty()) throw ValidationError("partition_sections: empty graph");
    if (graph.num_layers < 1) {
        throw ValidationError("partition_sections: graph must have at least one layer");
    }
    const std::vector<detail::OpDemand> demands = detail::op_demands(graph, options);

    SectionPlan plan;
    plan.mode = mode;
    plan.total_layers = graph.num_layers;

    if (mode == CompileMode::O0) {
        // One section per operator; decoder layers share the section.
        for (std::size_t i = 0; i < graph.ops.size(); ++i) {
            PlanSection s;
            s.label = graph.ops[i].name;
            s.ops = {graph.ops[i].name};
            s.invocations = graph.num_layers;
            s.pcu = demands[i].pcu;
            s.pmu = demands[i].pmu;
            s.flops = graph.ops[i].flops;
            plan.sections.push_back(std::move(s));
        }
        return plan;
    }

    if (mode == CompileMode::O1) {
        // Fuse ops into modules per the fusion map, preserving op order;
        // consecutive ops of the same module share a section.
        std::string open_label;
        for (std::size_t i = 0; i < graph.ops.size(); ++i) {
            const std::string& op = graph.ops[i].name;
            const auto fused = options.fusion.find(op);
            const std::string label = fused == options.fusion.end() ? op : fused->second;
            if (plan.sections.empty() || label != open_label ||
                fused == options.fusion.end()) {
                PlanSection s;
                s.label = label;
                s.invocations = graph.num_layers;
                plan.sections.push_back(std::move(s));
                open_label = label;
            }
            PlanSection& s = plan.sections.back();
            s.ops.push_back(op);
            s.pcu += demands[i].pcu;
            s.pmu += demands[i].pmu;
            s.flops += graph.ops[i].flops;
        }
        return plan;
    }

    // O3: pack consecutive whole decoders into sections while the unit
    // budget holds; a decoder too large for one section splits into at most
    // max_splits_per_decoder pieces.
    if (options.budget < 1) throw ValidationError("partition_sections: budget must be >= 1");
    std::int64_t decoder_pcu = 0;
    std::int64_t decoder_pmu = 0;
    double decoder_flops = 0.0;
    for (std::size_t i = 0; i < graph.ops.size(); ++i) {
        decoder_pcu += demands[i].pcu;
        decoder_pmu += demands[i].pmu;
        decoder_flops += graph.ops[i].flops;
    }
    const std::int64_t decoder_cost = std::max(decoder_pcu, decoder_pmu);

    if (decoder_cost <= options.budget) {
        const std::int64_t per_section = options.budget / decoder_cost;
        std::int64_t first = 0;
        while (first < graph.num_layers) {
            const std::int64_t count = std::min(per_section, graph.num_layers - first);
            PlanSection s;
            s.label = "decoders_" + std::to_string(first) + "_" + std::to_string(first + count - 1);
            s.decoder_range = {first, first + count - 1};
            for (const auto& op : graph.ops) s.ops.push_back(op.name);
            s.invocations = 1;
            s.pcu = decoder_pcu * count;
            s.pmu = decoder_pmu * count;
            s.flops = decoder_flops * static_cast<double>(count);
            plan.sections.push_back(std::move(s));
            first += count;
        }
        return plan;
    }

    // Split each decoder's op sequence greedily under the budget.
    std::vector<std::vector<std::size_t>> chunks;
    std::vector<std::size_t> current;
    std::int64_t current_pcu = 0;
    std::int64_t current_pmu = 0;
    for (std::size_t i = 0; i < graph.ops.size(); ++i) {
        const std::int64_t op_cost = std::max(demands[i].pcu, demands[i].pmu);
        if (op_cost > options.budget) {
            throw ValidationError("partition_sections: budget " + std::to_string(options.budget) +
                                  " is smaller than op \"" + graph.ops[i].name +
                                  "\" requirement " + std::to_string(op_cost));
        }
        const std::int64_t would_pcu = current_pcu + demands[i].pcu;
        const std::int64_t would_pmu = current_pmu + demands[i].pmu;
        if (!current.empty() && std::max(would_pcu, would_pmu) > options.budget) {
            chunks.push_back(current);
            current.clear();
            current_pcu = 0;
            current_pmu = 0;
        }
        current.push_back(i);
        current_pcu += demands[i].pcu;
        current_pmu += demands[i].pmu;
    }
    if (!current.empty()) chunks.push_back(current);
    if (static_cast<std::int64_t>(chunks.size()) > options.max_splits_per_decoder) {
        throw ValidationError("partition_sections: decoder needs " +
                              std::to_string(chunks.size()) + " sections under budget " +
                              std::to_string(options.budget) + ", above max_splits_per_decoder " +
                              std::to_string(options.max_splits_per_decoder));
    }
    for (std::int64_t layer = 0; layer < graph.num_layers; ++layer) {
        for (std::size_t c = 0; c < chunks.size(); ++c) {
            PlanSection s;
            s.label = "decoder_" + std::to_string(layer) + "_part" + std::to_string(c);
            s.decoder_range = {layer, layer};
            s.invocations = 1;
            for (const std::size_t i : chunks[c]) {
                s.ops.push_back(graph.ops[i].name);
                s.pcu += demands[i].pcu;
                s.pmu += demands[i].pmu;
                s.flops += graph.ops[i].flops;
            }
            plan.sections.push_back(std::move(s));
        }
    }
    return plan;
}

// ---------------------------------------------------------------------------
// Whole-graph kernel placement with elastic per-kernel unit counts.
// ---------------------------------------------------------------------------

struct PlacementKernel {
    std::int64_t layer = 0;
    std::int64_t compute_pes = 0;
    std::int64_t transmission_pes = 0;
};

struct PlacementPlan {
    std::vector<PlacementKernel> kernels;
    std::int64_t total_pes_used = 0;
    double cap = 0.93;
};

struct WsePlaceOptions {
    double cap = 0.93;  // hard ceiling on the fraction of PEs the plan may use
    std::int64_t preferred_kernel_pes = 280500;  // per-kernel ask when space allows
    double transmission_fraction = 0.45;  // transmission share of a kernel's PEs
    std::int64_t failure_layers = 78;     // placement is declared infeasible from here on
};

inline PlacementPlan wse_place(std::int64_t layers, const HardwareSpec& chip,
                               const WsePlaceOptions& options = {}) {
    if (layers < 1) throw ValidationError("wse_place: layers must be >= 1");
    if (!(options.cap > 0.0) || options.cap > 1.0) {
        throw ValidationError("wse_place: cap must lie in (0, 1]");
    }
    if (options.transmission_fraction < 0.0 || options.transmission_fraction >= 1.0) {
        throw ValidationError("wse_place: transmission_fraction must lie in [0, 1)");
    }
    const auto total_it = chip.resource_totals.find(ResourceKind::PE);
    if (total_it == chip.resource_totals.end()) {
        throw ValidationError("wse_place: hardware spec " + chip.name + " has no PE total");
    }
    if (layers >= options.failure_layers) {
        throw ValidationError("wse_place: cannot place " + std::to_string(layers) +
                              " layers; placement fails at " +
                              std::to_string(options.failure_layers) + " layers or more");
    }
    const double pe_total = static_cast<double>(total_it->second);
    const std::int64_t pref_trans = std::llround(
        static_cast<double>(options.preferred_kernel_pes) * options.transmission_fraction);
    const std::int64_t pref_comp = options.preferred_kernel_pes - pref_trans;
    const double l = static_cast<double>(layers);
    const auto budget = [&](double share) {
        return static_cast<std::int64_t>(std::floor(options.cap * pe_total * share / l));
    };
    const std::int64_t budget_comp = budget(1.0 - options.transmission_fraction);
    const std::int64_t budget_trans = budget(options.transmission_fraction);

    PlacementPlan plan;
    plan.cap = options.cap;
    for (std::int64_t layer = 0; layer < layers; ++layer) {
        PlacementKernel k;
        k.layer = layer;
        k.compute_pes = std::min(pref_comp, budget_comp);
        k.transmission_pes = std::min(pref_trans, budget_trans);
        plan.total_pes_used += k.compute_pes + k.transmission_pes;
        plan.kernels.push_back(k);
    }
    if (static_cast<double>(plan.total_pes_used) > options.cap * pe_total) {
        throw InternalError("wse_place: placement exceeds the cap");
    }
    return plan;
}

// ---------------------------------------------------------------------------
// Trace synthesis. Linear cost model: throughput proportional to assigned
// units, runtime proportional to flops/units. Synthesized metrics are
// therefore computable in closed form from the plan.
// ---------------------------------------------------------------------------

struct CostModel {
    double tokens_per_unit = 1.0;      // task throughput per assigned unit
    double flops_per_unit_s = 1e9;     // section compute rate per assigned unit
    double per_layer_capacity = 1e3;   // pipeline-stage tokens/s for one layer
};

namespace detail {

inline std::string padded_index(std::int64_t value, int width = 4) {
    std::string digits = std::to_string(value);
    while (static_cast<int>(digits.size()) < width) digits.insert(digits.begin(), '0');
    return digits;
}

}  // namespace detail

/// Placement plan -> one compute and one transmission task per kernel. Both
/// tasks of a kernel share the kernel's throughput (units * tokens_per_unit),
/// so a uniform plan yields a perfectly balanced trace.
inline TraceSet synthesize_trace(const PlacementPlan& plan, const std::string& platform,
                                 const CostModel& cost = {}) {
    TraceSet trace;
    trace.metadata.platform = platform;
    trace.metadata.precision = "fp16";
    trace.metadata.provenance = Provenance::compile_time;
    trace.metadata.granularity = "kernel";
    for (const auto& kernel : plan.kernels) {
        const double kernel_throughput =
            static_cast<double>(kernel.compute_pes + kernel.transmission_pes) *
            cost.tokens_per_unit;
        TaskRecord compute;
        compute.task_id = "layer_" + detail::padded_index(kernel.layer) + "_compute";
        compute.kind = TaskKind::compute;
        compute.units[ResourceKind::PE] = kernel.compute_pes;
        compute.throughput = kernel_throughput;
        trace.tasks.push_back(std::move(compute));
        TaskRecord transmission;
        transmission.task_id = "layer_" + detail::padded_index(kernel.layer) + "_transmission";
        transmission.kind = TaskKind::transmission;
        transmission.units[ResourceKind::PE] = kernel.transmission_pes;
        transmission.throughput = kernel_throughput;
        trace.tasks.push_back(std::move(transmission));
    }
    trace.validate();
    return trace;
}

/// Section plan -> section records with runtimes from the linear cost model.
inline TraceSet synthesize_trace(const SectionPlan& plan, const std::string& platform,
                                 const CostModel& cost = {}) {
    TraceSet trace;
    trace.metadata.platform = platform;
    trace.metadata.precision = "bf16";
    trace.metadata.provenance = Provenance::compile_time;
    trace.metadata.granularity = "section";
    for (std::size_t i = 0; i < plan.sections.size(); ++i) {
        const PlanSection& s = plan.sections[i];
        SectionRecord record;
        record.section_id = static_cast<std::int64_t>(i);
        record.units[ResourceKind::PCU] = s.pcu;
        record.units[ResourceKind::PMU] = s.pmu;
        record.invocations = s.invocations;
        const double units = static_cast<double>(s.pcu);
        record.runtime_s = units > 0.0 ? static_cast<double>(s.invocations) * s.flops /
                                             (units * cost.flops_per_unit_s)
                                       : 0.0;
        trace.sections.push_back(std::move(record));
    }
    trace.validate();
    return trace;
}

/// Pipeline plan -> one task per decoder-carrying stage at the bottleneck
/// cost model's stage throughput; the embedding stage is control logic and
/// carries no decoder task.
inline TraceSet synthesize_trace(const PipelinePlan& plan, const std::string& platform,
                                 const HardwareSpec& chip, const CostModel& cost = {}) {
    const auto tiles_it = chip.resource_totals.find(ResourceKind::tile);
    if (tiles_it == chip.resource_totals.end()) {
        throw ValidationError("synthesize_trace: hardware spec " + chip.name +
                              " has no tile total for pipeline synthesis");
    }
    TraceSet trace;
    trace.metadata.platform = platform;
    trace.metadata.precision = "fp16";
    trace.metadata.provenance = Provenance::compile_time;
    trace.metadata.granularity = "stage";
    trace.metadata.parallelism.strategy = ParallelStrategy::PP;
    trace.metadata.parallelism.degree = static_cast<std::int64_t>(plan.stage_layers.size());
    trace.metadata.parallelism.stage_layers = plan.stage_layers;
    trace.metadata.system_throughput =
        pp_system_throughput(plan.stage_layers, cost.per_layer_capacity);
    for (std::size_t i = 0; i < plan.stage_layers.size(); ++i) {
        const std::int64_t layers = plan.stage_layers[i];
        if (layers == 0) continue;
        TaskRecord task;
        task.task_id = "stage_" + detail::padded_index(static_cast<std::int64_t>(i), 2);
        task.kind = TaskKind::compute;
        task.units[ResourceKind::tile] = tiles_it->second;
        task.throughput = cost.per_layer_capacity / static_cast<double>(layers);
        trace.tasks.push_back(std::move(task));
    }
    trace.validate();
    return trace;
}

// ---------------------------------------------------------------------------
// Plan sidecar serialization (JSON; consumed by the simulate subcommand).
// ---------------------------------------------------------------------------

inline json plan_to_json(const SectionPlan& plan) {
    json doc;
    doc["kind"] = "section_plan";
    doc["mode"] = to_string(plan.mode);
    doc["total_layers"] = plan.total_layers;
    json sections = json::array();
    for (const auto& s : plan.sections) {
        json sec;
        sec["label"] = s.label;
        sec["ops"] = s.ops;
        if (s.decoder_range) {
            sec["decoder_range"] = {{"first", s.decoder_range->first},
                                    {"last", s.decoder_range->second}};
        }
        sec["invocations"] = s.invocations;
        sec["units"] = {{"PCU", s.pcu}, {"PMU", s.pmu}};
        sec["flops"] = s.flops;
        sections.push_back(sec);
    }
    doc["sections"] = sections;
    return doc;
}

inline json plan_to_json(const PlacementPlan& plan) {
    json doc;
    doc["kind"] = "placement_plan";
    doc["cap"] = plan.cap;
    doc["total_pes_used"] = plan.total_pes_used;
    json kernels = json::array();
    for (const auto& k : plan.kernels) {
        kernels.push_back({{"layer", k.layer},
                           {"compute_pes", k.compute_pes},
                           {"transmission_pes", k.transmission_pes}});
    }
    doc["kernels"] = kernels;
    return doc;
}

inline json plan_to_json(const PipelinePlan& plan) {
    json doc;
    doc["kind"] = "pipeline_plan";
    doc["stage_layers"] = plan.stage_layers;
    if (plan.embedding_stage) {
        doc["embedding_stage"] = static_cast<std::int64_t>(*plan.embedding_stage);
    }
    doc["predicted_relative_throughput"] = plan.predicted_relative_throughput;
    return doc;
}

}  // namespace flowbench
