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
#include "flowbench/trace.hpp"

namespace flowbench {

/// One run of a parallelism sweep relative to its baseline.
struct ScalingResult {
    ParallelStrategy strategy = ParallelStrategy::none;
    std::int64_t degree = 1;
    double throughput = 0.0;  // tokens/s
    double speedup = 1.0;     // throughput / baseline
    double efficiency = 1.0;  // speedup / degree
    std::vector<std::string> commentary;
};

inline ScalingResult scaling_efficiency(double baseline, double scaled, std::int64_t degree) {
    if (!(baseline > 0.0)) throw ValidationError("scaling_efficiency: baseline must be > 0");
    if (degree < 1) throw ValidationError("scaling_efficiency: degree must be >= 1");
    ScalingResult r;
    r.degree = degree;
    r.throughput = scaled;
    r.speedup = scaled / baseline;
    r.efficiency = r.speedup / static_cast<double>(degree);
    if (r.efficiency < 0.5) {
        r.commentary.push_back("sub-linear scaling: efficiency below 0.5 of ideal");
    }
    return r;
}

/// Throughput loss when switching from fully-resident weights to streaming:
/// 1 - streaming/full.
inline double weight_streaming_penalty(double full, double streaming) {
    if (!(full > 0.0)) throw ValidationError("weight_streaming_penalty: full must be > 0");
    if (streaming < 0.0) {
        throw ValidationError("weight_streaming_penalty: streaming must be >= 0");
    }
    return 1.0 - streaming / full;
}

/// Per-step throughput degradation along a tensor-parallel sweep. A step is
/// flagged when it crosses from intra-node to inter-node device counts.
struct TpStep {
    std::int64_t from_degree = 0;
    std::int64_t to_degree = 0;
    double from_throughput = 0.0;
    double to_throughput = 0.0;
    double degradation = 0.0;  // 1 - to/from
    bool crosses_machine_boundary = false;
};

inline std::vector<TpStep> tp_degradation(
    const std::vector<std::pair<std::int64_t, double>>& runs_by_degree,
    std::int64_t devices_per_node) {
    if (runs_by_degree.size() < 2) {
        throw ValidationError("tp_degradation: need at least two TP runs with distinct degrees");
    }
    if (devices_per_node < 1) {
        throw ValidationError("tp_degradation: devices_per_node must be >= 1");
    }
    auto runs = runs_by_degree;
    std::sort(runs.begin(), runs.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < runs.size(); ++i) {
        if (runs[i].first == runs[i - 1].first) {
            throw ValidationError("tp_degradation: duplicate TP degree " +
                                  std::to_string(runs[i].first));
        }
    }
    std::vector<TpStep> steps;
    for (std::size_t i = 1; i < runs.size(); ++i) {
        const auto& [prev_degree, prev_throughput] = runs[i - 1];
        const auto& [next_degree, next_throughput] = runs[i];
        if (!(prev_throughput > 0.0)) {
            throw ValidationError("tp_degradation: throughput must be > 0 at degree " +
                                  std::to_string(prev_degree));
        }
        TpStep step;
        step.from_degree = prev_degree;
        step.to_degree = next_degree;
        step.from_throughput = prev_throughput;
        step.to_throughput = next_throughput;
        step.degradation = 1.0 - next_throughput / prev_throughput;
        step.crosses_machine_boundary =
            prev_degree <= devices_per_node && next_degree > devices_per_node;
        steps.push_back(step);
    }
    return steps;
}

/// Pipeline throughput under the equal-per-layer-cost model: the stage with
/// the most layers is the bottleneck, so system throughput is
/// per_layer_capacity / max positive stage load.
inline double pp_system_throughput(const std::vector<std::int64_t>& stage_layers,
                                   double per_layer_capacity) {
    if (!(per_layer_capacity > 0.0)) {
        throw ValidationError("pp_system_throughput: per_layer_capacity must be > 0");
    }
    std::int64_t max_layers = 0;
    for (const std::int64_t layers : stage_layers) {
        if (layers < 0) throw ValidationError("pp_system_throughput: stage_layers must be >= 0");
        max_layers = std::max(max_layers, layers);
    }
    if (max_layers == 0) throw ValidationError("pp_system_throughput: all stages are empty");
    return per_layer_capacity / static_cast<double>(max_layers);
}

/// A pipeline stage assignment: which stage holds the embedding (if pinned)
/// and how many decoder layers each stage carries.
struct PipelinePlan {
    std::vector<std::int64_t> stage_layers;
    std::optional<std::size_t> embedding_stage;
    double predicted_relative_throughput = 0.0;  // 1 / max stage load
};

/// Distribute decoder layers over devices, minimizing the maximum per-stage
/// load; ties broken by giving earlier stages the extra layer. With
/// pin_embedding the first device carries only the embedding.
inline PipelinePlan pp_assign(std::int64_t total_layers, std::int64_t devices,
                              bool pin_embedding = true) {
    if (total_layers < 1) throw ValidationError("pp_assign: total_layers must be >= 1");
    const std::int64_t required = pin_embedding ? 2 : 1;
    if (devices < required) {
        throw ValidationError("pp_assign: need at least " + std::to_string(required) +
                              " devices" + (pin_embedding ? " (one is pinned to the embedding)" : ""));
    }
    const std::int64_t usable = devices - (pin_embedding ? 1 : 0);
    const std::int64_t base = total_layers / usable;
    const std::int64_t extra = total_layers % usable;
    PipelinePlan plan;
    if (pin_embedding) {
        plan.embedding_stage = 0;
        plan.stage_layers.push_back(0);
    }
    for (std::int64_t i = 0; i < usable; ++i) {
        plan.stage_layers.push_back(base + (i < extra ? 1 : 0));
    }
    const std::int64_t max_load = base + (extra > 0 ? 1 : 0);  // == ceil(total/usable)
    plan.predicted_relative_throughput = 1.0 / static_cast<double>(max_load);
    return plan;
}

/// Smallest batch size after which every further batch-doubling improves
/// throughput by less than theta; nullopt if gains never fall below theta.
inline std::optional<std::int64_t> batch_knee(
    const std::vector<std::pair<std::int64_t, double>>& sweep, double theta = 0.10) {
    if (sweep.size() < 3) {
        throw ValidationError("batch_knee: need at least three (batch, throughput) points");
    }
    if (!(theta > 0.0)) throw ValidationError("batch_knee: theta must be > 0");
    for (std::size_t i = 0; i < sweep.size(); ++i) {
        if (sweep[i].first < 1) throw ValidationError("batch_knee: batch sizes must be >= 1");
        if (!(sweep[i].second > 0.0)) {
            throw ValidationError("batch_knee: throughput must be > 0 at batch " +
                                  std::to_string(sweep[i].first));
        }
        if (i > 0 && sweep[i].first <= sweep[i - 1].first) {
            throw ValidationError("batch_knee: unsorted or duplicate batches");
        }
    }
    // Per-step throughput gain normalized to one batch-doubling.
    std::vector<double> gains;
    for (std::size_t i = 1; i < sweep.size(); ++i) {
        const double batch_ratio = static_cast<double>(sweep[i].first) /
                                   static_cast<double>(sweep[i - 1].first);
        const double throughput_ratio = sweep[i].second / sweep[i - 1].second;
        gains.push_back(std::pow(throughput_ratio, 1.0 / std::log2(batch_ratio)) - 1.0);
    }
    // Smallest suffix where every remaining doubling gain is below theta.
    std::size_t knee_index = gains.size();
    for (std::size_t i = gains.size(); i-- > 0;) {
        if (gains[i] >= theta) break;
        knee_index = i;
    }
    if (knee_index == gains.size()) return std::nullopt;
    return sweep[knee_index].first;
}

/// Relative throughput gain of an optimized-precision run over its baseline:
/// optimized/base - 1.
inline double precision_gain(double base, double optimized) {
    if (!(base > 0.0)) throw ValidationError("precision_gain: base must be > 0");
    if (optimized < 0.0) throw ValidationError("precision_gain: optimized must be >= 0");
    return optimized / base - 1.0;
}

// ---------------------------------------------------------------------------
// Aggregation over sweep groups. Sweep names are reserved: "dp" (data
// parallelism, may include a weight-streaming member), "tp", "pp", "batch",
// "precision". Runs missing required fields produce not_computable entries.
// ---------------------------------------------------------------------------

struct Tier2Options {
    double theta = 0.10;  // batch-knee threshold per doubling
};

struct PpRunSummary {
    std::int64_t degree = 0;
    std::vector<std::int64_t> stage_layers;
    std::int64_t bottleneck_layers = 0;
    double throughput = 0.0;  // tokens/s
};

struct PrecisionGainResult {
    std::string platform;
    std::string base_precision;
    std::string optimized_precision;
    double base_throughput = 0.0;
    double optimized_throughput = 0.0;
    double gain = 0.0;
};

struct BatchPoint {
    std::int64_t batch = 0;
    double throughput = 0.0;
};

struct Tier2Metrics {
    std::vector<ScalingResult> dp_scaling;  // baseline first, ascending degree
    std::optional<double> weight_streaming_penalty;
    std::vector<TpStep> tp_steps;
    std::vector<PpRunSummary> pp_runs;
    std::optional<PipelinePlan> pp_recommendation;
    std::vector<BatchPoint> batch_sweep;
    std::optional<std::int64_t> batch_knee;
    double batch_knee_theta = 0.10;
    std::vector<PrecisionGainResult> precision_gains;
    std::vector<std::string> not_computable;
    std::vector<std::string> warnings;
};

namespace detail {

inline std::string run_label(const TraceSet& trace, std::size_t index) {
    return trace.metadata.platform + " run " + std::to_string(index + 1) + " (strategy " +
           to_string(trace.metadata.parallelism.strategy) + ", degree " +
           std::to_string(trace.metadata.parallelism.degree) + ")";
}

inline void aggregate_dp(const std::vector<TraceSet>& runs, Tier2Metrics& out) {
    struct Run {
        std::int64_t degree;
        double throughput;
        ParallelStrategy strategy;
    };
    std::vector<Run> scaling_runs;
    std::optional<double> streaming_throughput;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto& meta = runs[i].metadata;
        if (!meta.system_throughput) {
            out.not_computable.push_back("dp sweep: " + run_label(runs[i], i) +
                                         ": missing system_throughput");
            continue;
        }
        if (meta.parallelism.strategy == ParallelStrategy::weight_streaming) {
            if (streaming_throughput) {
                out.warnings.push_back("dp sweep: multiple weight-streaming runs; using the "
                                       "first for the penalty");
            } else {
                streaming_throughput = *meta.system_throughput;
            }
            continue;
        }
        if (meta.parallelism.strategy != ParallelStrategy::DP &&
            meta.parallelism.strategy != ParallelStrategy::none) {
            out.warnings.push_back("dp sweep: ignoring " + run_label(runs[i], i) +
                                   " with non-DP strategy");
            continue;
        }
        scaling_runs.push_back(
            {meta.parallelism.degree, *meta.system_throughput, meta.parallelism.strategy});
    }
    if (scaling_runs.empty()) {
        if (!runs.empty()) out.not_computable.push_back("dp sweep: no usable DP runs");
        return;
    }
    std::stable_sort(scaling_runs.begin(), scaling_runs.end(),
                     [](const Run& a, const Run& b) { return a.degree < b.degree; });
    const double baseline = scaling_runs.front().throughput;
    if (!(baseline > 0.0)) {
        out.not_computable.push_back("dp sweep: baseline run has zero throughput");
        return;
    }
    for (const Run& run : scaling_runs) {
        ScalingResult r = scaling_efficiency(baseline, run.throughput, run.degree);
        r.strategy = run.strategy;
        out.dp_scaling.push_back(std::move(r));
    }
    if (streaming_throughput) {
        out.weight_streaming_penalty = weight_streaming_penalty(baseline, *streaming_throughput);
    }
}

inline void aggregate_tp(const std::vector<TraceSet>& runs, const HardwareSpec& spec,
                         Tier2Metrics& out) {
    std::vector<std::pair<std::int64_t, double>> by_degree;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto& meta = runs[i].metadata;
        if (meta.parallelism.strategy != ParallelStrategy::TP) {
            out.warnings.push_back("tp sweep: ignoring " + run_label(runs[i], i) +
                                   " with non-TP strategy");
            continue;
        }
        if (!meta.system_throughput) {
            out.not_computable.push_back("tp sweep: " + run_label(runs[i], i) +
                                         ": missing system_throughput");
            continue;
        }
        by_degree.emplace_back(meta.parallelism.degree, *meta.system_throughput);
    }
    if (by_degree.size() < 2) {
        if (!runs.empty()) {
            out.not_computable.push_back("tp sweep: need at least two TP runs, got " +
                                         std::to_string(by_degree.size()));
        }
        return;
    }
    // The machine boundary is a property of the machine the sweep ran on,
    // which may differ from the manifest's headline hardware.
    const HardwareSpec tp_spec = spec_for_platform(runs.front().metadata.platform, spec);
    out.tp_steps = tp_degradation(by_degree, tp_spec.devices_per_node);
}

inline void aggregate_pp(const std::vector<TraceSet>& runs, Tier2Metrics& out) {
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto& meta = runs[i].metadata;
        if (meta.parallelism.strategy != ParallelStrategy::PP) {
            out.warnings.push_back("pp sweep: ignoring " + run_label(runs[i], i) +
                                   " with non-PP strategy");
            continue;
        }
        if (!meta.system_throughput) {
            out.not_computable.push_back("pp sweep: " + run_label(runs[i], i) +
                                         ": missing system_throughput");
            continue;
        }
        if (!meta.parallelism.stage_layers) {
            out.not_computable.push_back("pp sweep: " + run_label(runs[i], i) +
                                         ": missing stage_layers");
            continue;
        }
        PpRunSummary summary;
        summary.degree = meta.parallelism.degree;
        summary.stage_layers = *meta.parallelism.stage_layers;
        summary.bottleneck_layers = 0;
        for (const std::int64_t layers : summary.stage_layers) {
            summary.bottleneck_layers = std::max(summary.bottleneck_layers, layers);
        }
        summary.throughput = *meta.system_throughput;
        out.pp_runs.push_back(std::move(summary));
    }
    if (out.pp_runs.empty()) {
        if (!runs.empty()) out.not_computable.push_back("pp sweep: no usable PP runs");
        return;
    }
    // Recommend a balanced plan for the largest configuration in the sweep.
    const PpRunSummary* target = &out.pp_runs.front();
    std::int64_t target_layers = 0;
    for (const std::int64_t layers : target->stage_layers) target_layers += layers;
    for (const auto& run : out.pp_runs) {
        std::int64_t layers_total = 0;
        for (const std::int64_t layers : run.stage_layers) layers_total += layers;
        if (run.degree > target->degree ||
            (run.degree == target->degree && layers_total > target_layers)) {
            target = &run;
            target_layers = layers_total;
        }
    }
    if (target_layers > 0) {
        out.pp_recommendation = pp_assign(target_layers, target->degree, /*pin_embedding=*/true);
    }
}

inline void aggregate_batch(const std::vector<TraceSet>& runs, const Tier2Options& options,
                            Tier2Metrics& out) {
    std::vector<std::pair<std::int64_t, double>> sweep;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto& meta = runs[i].metadata;
        if (!meta.workload) {
            out.not_computable.push_back("batch sweep: " + run_label(runs[i], i) +
                                         ": missing workload (batch_size unknown)");
            continue;
        }
        if (!meta.system_throughput) {
            out.not_computable.push_back("batch sweep: " + run_label(runs[i], i) +
                                         ": missing system_throughput");
            continue;
        }
        sweep.emplace_back(meta.workload->batch_size, *meta.system_throughput);
    }
    if (sweep.empty()) return;
    std::sort(sweep.begin(), sweep.end());
    for (const auto& [batch, throughput] : sweep) {
        out.batch_sweep.push_back({batch, throughput});
    }
    out.batch_knee_theta = options.theta;
    if (sweep.size() < 3) {
        out.not_computable.push_back("batch_knee: need at least three points, got " +
                                     std::to_string(sweep.size()));
        return;
    }
    out.batch_knee = batch_knee(sweep, options.theta);
}

inline void aggregate_precision(const std::vector<TraceSet>& runs, Tier2Metrics& out) {
    // Group by platform, preserving manifest order: the first run of each
    // pair is the baseline precision, the second the optimized one.
    std::vector<std::string> platforms;
    std::map<std::string, std::vector<const TraceSet*>> groups;
    for (const auto& run : runs) {
        auto& group = groups[run.metadata.platform];
        if (group.empty()) platforms.push_back(run.metadata.platform);
        group.push_back(&run);
    }
    for (const auto& platform : platforms) {
        const auto& group = groups[platform];
        if (group.size() != 2) {
            out.not_computable.push_back("precision sweep: platform " + platform + " has " +
                                         std::to_string(group.size()) +
                                         " runs; expected a (base, optimized) pair");
            continue;
        }
        const auto& base = group[0]->metadata;
        const auto& optimized = group[1]->metadata;
        if (!base.system_throughput || !optimized.system_throughput) {
            out.not_computable.push_back("precision sweep: platform " + platform +
                                         ": missing system_throughput");
            continue;
        }
        PrecisionGainResult r;
        r.platform = platform;
        r.base_precision = base.precision;
        r.optimized_precision = optimized.precision;
        r.base_throughput = *base.system_throughput;
        r.optimized_throughput = *optimized.system_throughput;
        r.gain = precision_gain(r.base_throughput, r.optimized_throughput);
        out.precision_gains.push_back(std::move(r));
    }
}

}  // namespace detail

/// Aggregate Tier-2 metrics over sweep groups keyed by sweep name.
inline Tier2Metrics compute_tier2(const std::map<std::string, std::vector<TraceSet>>& sweeps,
                                  const HardwareSpec& spec, const Tier2Options& options = {}) {
    Tier2Metrics out;
    out.batch_knee_theta = options.theta;
    for (const auto& [name, runs] : sweeps) {
        if (name == "dp") {
            detail::aggregate_dp(runs, out);
        } else if (name == "tp") {
            detail::aggregate_tp(runs, spec, out);
        } else if (name == "pp") {
            detail::aggregate_pp(runs, out);
        } else if (name == "batch") {
            detail::aggregate_batch(runs, options, out);
        } else if (name == "precision") {
            detail::aggregate_precision(runs, out);
        } else {
            out.warnings.push_back("sweep \"" + name +
                                   "\": unrecognized sweep name; expected one of dp, tp, pp, "
                                   "batch, precision");
        }
    }
    return out;
}

}  // namespace flowbench
