// SPDX-FileCopyrightText: © 2026 flowbench contributors
//
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flowbench/errors.hpp"
#include "flowbench/hardware.hpp"
#include "flowbench/numeric.hpp"
#include "flowbench/trace.hpp"
#include "flowbench/workload.hpp"

namespace flowbench {

/// Fraction of on-chip units the compiler allocated: r_used / r_all.
inline double allocation_ratio(std::int64_t r_used, std::int64_t r_all) {
    if (r_all < 1) throw ValidationError("allocation_ratio: r_all must be >= 1");
    if (r_used < 0) throw ValidationError("allocation_ratio: r_used must be >= 0");
    if (r_used > r_all) {
        throw ValidationError("allocation_ratio: impossible allocation (r_used " +
                              std::to_string(r_used) + " > r_all " + std::to_string(r_all) + ")");
    }
    return static_cast<double>(r_used) / static_cast<double>(r_all);
}

namespace detail {

/// Sections in ascending section_id order so summation order is fixed.
inline std::vector<const SectionRecord*> sections_by_id(const std::vector<SectionRecord>& sections) {
    std::vector<const SectionRecord*> ordered;
    ordered.reserve(sections.size());
    for (const auto& s : sections) ordered.push_back(&s);
    std::sort(ordered.begin(), ordered.end(), [](const SectionRecord* a, const SectionRecord* b) {
        return a->section_id < b->section_id;
    });
    return ordered;
}

}  // namespace detail

/// Runtime-weighted allocation ratio over sections:
/// sum L_i * (R_i / R_all) / sum L_i for the given resource kind.
inline double weighted_allocation(const std::vector<SectionRecord>& sections, std::int64_t r_all,
                                  ResourceKind kind) {
    if (r_all < 1) throw ValidationError("weighted_allocation: r_all must be >= 1");
    if (sections.empty()) throw ValidationError("weighted_allocation: no sections");
    CompensatedSum num;
    CompensatedSum den;
    double lo = 1.0;
    double hi = 0.0;
    for (const SectionRecord* s : detail::sections_by_id(sections)) {
        std::int64_t r = 0;
        if (const auto it = s->units.find(kind); it != s->units.end()) r = it->second;
        if (r > r_all) {
            throw ValidationError("weighted_allocation: section " +
                                  std::to_string(s->section_id) + " uses more units than r_all");
        }
        if (s->runtime_s < 0.0) throw ValidationError("weighted_allocation: runtime_s must be >= 0");
        const double share = static_cast<double>(r) / static_cast<double>(r_all);
        num.add(s->runtime_s * share);
        den.add(s->runtime_s);
        lo = std::min(lo, share);
        hi = std::max(hi, share);
    }
    if (!(den.value() > 0.0)) throw ValidationError("weighted_allocation: no time weight");
    // Guard against summation noise pushing the mean outside its hull.
    return std::clamp(num.value() / den.value(), lo, hi);
}

/// Load imbalance over tasks for one resource kind:
/// (1 / sum R_i) * sum (T_min / T_i) * R_i, in (0, 1]; 1 means perfectly
/// balanced. Tasks with zero units of the kind are excluded. Implemented as
/// sum (T_min/T_i) * (R_i / sum R), which is exactly invariant under scaling
/// every R_i by a common positive integer.
inline double load_imbalance(const std::vector<TaskRecord>& tasks, ResourceKind kind) {
    struct Item {
        const std::string* id;
        std::int64_t r;
        double t;
    };
    std::vector<Item> included;
    for (const auto& task : tasks) {
        const auto it = task.units.find(kind);
        if (it == task.units.end() || it->second <= 0) continue;
        included.push_back({&task.task_id, it->second, task.throughput});
    }
    if (included.empty()) {
        throw ValidationError(std::string("load_imbalance: no task has units of kind ") +
                              to_string(kind));
    }
    // Fixed summation order: ascending task_id.
    std::sort(included.begin(), included.end(),
              [](const Item& a, const Item& b) { return *a.id < *b.id; });
    double t_min = included.front().t;
    double t_max = included.front().t;
    std::int64_t r_sum = 0;
    for (const auto& item : included) {
        if (item.t == 0.0) {
            throw ValidationError("load_imbalance: zero throughput in task \"" + *item.id +
                                  "\" makes the metric ill-defined; filter stalled tasks first");
        }
        t_min = std::min(t_min, item.t);
        t_max = std::max(t_max, item.t);
        r_sum += item.r;
    }
    if (t_min == t_max) return 1.0;  // equal throughputs: exactly balanced
    CompensatedSum sum;
    for (const auto& item : included) {
        const double weight = static_cast<double>(item.r) / static_cast<double>(r_sum);
        sum.add((t_min / item.t) * weight);
    }
    return std::min(sum.value(), 1.0);
}

/// Runtime-weighted mean of per-section load imbalance values:
/// sum L_i * LI_i / sum L_i.
inline double weighted_load_imbalance(const std::vector<SectionRecord>& sections) {
    if (sections.empty()) throw ValidationError("weighted_load_imbalance: no sections");
    CompensatedSum num;
    CompensatedSum den;
    double lo = 1.0;
    double hi = 0.0;
    for (const SectionRecord* s : detail::sections_by_id(sections)) {
        if (!s->li) {
            throw ValidationError("weighted_load_imbalance: section " +
                                  std::to_string(s->section_id) + " is missing li");
        }
        if (s->runtime_s < 0.0) {
            throw ValidationError("weighted_load_imbalance: runtime_s must be >= 0");
        }
        num.add(s->runtime_s * *s->li);
        den.add(s->runtime_s);
        lo = std::min(lo, *s->li);
        hi = std::max(hi, *s->li);
    }
    if (!(den.value() > 0.0)) throw ValidationError("weighted_load_imbalance: no time weight");
    return std::clamp(num.value() / den.value(), lo, hi);
}

struct MemoryFractions {
    double config = 0.0;
    double training = 0.0;
    double total = 0.0;
};

/// Config/training/total memory as fractions of on-chip capacity.
inline MemoryFractions memory_breakdown(std::int64_t config_bytes, std::int64_t training_bytes,
                                        std::int64_t onchip_capacity_bytes) {
    if (onchip_capacity_bytes <= 0) {
        throw ValidationError("memory_breakdown: on-chip capacity must be > 0");
    }
    if (config_bytes < 0 || training_bytes < 0) {
        throw ValidationError("memory_breakdown: byte counts must be >= 0");
    }
    if (config_bytes + training_bytes > onchip_capacity_bytes) {
        throw ValidationError("memory_breakdown: capacity exceeded (config + training = " +
                              std::to_string(config_bytes + training_bytes) + " bytes > " +
                              std::to_string(onchip_capacity_bytes) + " bytes)");
    }
    const double cap = static_cast<double>(onchip_capacity_bytes);
    MemoryFractions f;
    f.config = static_cast<double>(config_bytes) / cap;
    f.training = static_cast<double>(training_bytes) / cap;
    f.total = static_cast<double>(config_bytes + training_bytes) / cap;
    return f;
}

/// Achieved / peak for the given precision. Returns the raw ratio; report
/// generation clamps values above 1 with a warning.
inline double compute_efficiency(double achieved_tflops, const HardwareSpec& spec,
                                 const std::string& precision) {
    if (achieved_tflops < 0.0) {
        throw ValidationError("compute_efficiency: achieved_tflops must be >= 0");
    }
    return achieved_tflops * 1e12 / spec.peak_for(precision);
}

/// Place a workload on the roofline, attaching the achieved value when known.
inline RooflinePoint roofline_place(double ai, std::optional<double> achieved_tflops,
                                    const HardwareSpec& spec, const std::string& precision) {
    std::optional<double> achieved_flops;
    if (achieved_tflops) achieved_flops = *achieved_tflops * 1e12;
    return attainable(spec, precision, ai, achieved_flops);
}

// ---------------------------------------------------------------------------
// Aggregation over one TraceSet. Metrics whose inputs are absent are listed
// under not_computable with the missing field named, never dropped silently.
// ---------------------------------------------------------------------------

struct Tier1Options {
    ActivationModel activation;    // c_act and the attention-score toggle
    double bytes_per_param = 4.0;  // weight-traffic assumption feeding AI
    std::optional<double> explicit_ai;  // overrides the workload-derived AI
};

struct Tier1Metrics {
    std::map<ResourceKind, double> allocation_ratio;     // per kind, from task unit sums
    std::map<ResourceKind, double> weighted_allocation;  // per kind, from sections
    std::optional<double> load_imbalance;
    std::optional<ResourceKind> load_imbalance_kind;
    std::optional<double> weighted_li;
    std::optional<MemoryFractions> memory_fractions;
    std::optional<double> compute_efficiency;  // raw ratio, may exceed 1
    std::optional<double> compute_utilization;  // opaque ingested scalar
    std::optional<RooflinePoint> roofline;
    std::optional<double> arithmetic_intensity;
    std::vector<std::string> not_computable;
    std::vector<std::string> warnings;
};

inline Tier1Metrics compute_tier1(const TraceSet& trace, const HardwareSpec& spec,
                                  const Tier1Options& options = {}) {
    trace.validate();
    Tier1Metrics out;
    out.warnings = trace.warnings;

    // Eq-style allocation ratios: units summed over tasks, per resource kind.
    std::map<ResourceKind, std::int64_t> used;
    for (const auto& task : trace.tasks) {
        for (const auto& [kind, count] : task.units) used[kind] += count;
    }
    for (const auto& [kind, r_used] : used) {
        const auto total = spec.resource_totals.find(kind);
        if (total == spec.resource_totals.end()) {
            out.not_computable.push_back(std::string("allocation_ratio[") + to_string(kind) +
                                         "]: hardware spec lists no total for this kind");
            continue;
        }
        out.allocation_ratio[kind] = allocation_ratio(r_used, total->second);
    }

    // Runtime-weighted allocation from sections.
    if (!trace.sections.empty()) {
        std::map<ResourceKind, bool> kinds;
        for (const auto& s : trace.sections) {
            for (const auto& [kind, count] : s.units) {
                if (count > 0) kinds[kind] = true;
            }
        }
        for (const auto& [kind, present] : kinds) {
            (void)present;
            const auto total = spec.resource_totals.find(kind);
            if (total == spec.resource_totals.end()) {
                out.not_computable.push_back(std::string("weighted_allocation[") +
                                             to_string(kind) +
                                             "]: hardware spec lists no total for this kind");
                continue;
            }
            out.weighted_allocation[kind] = weighted_allocation(trace.sections, total->second, kind);
        }
    }

    // Load imbalance for the first resource kind (enum order) with coverage.
    if (!trace.tasks.empty()) {
        for (const ResourceKind kind :
             {ResourceKind::PE, ResourceKind::PCU, ResourceKind::PMU, ResourceKind::tile}) {
            bool covered = false;
            for (const auto& task : trace.tasks) {
                if (task.has_units(kind)) {
                    covered = true;
                    break;
                }
            }
            if (!covered) continue;
            out.load_imbalance = load_imbalance(trace.tasks, kind);
            out.load_imbalance_kind = kind;
            break;
        }
        if (!out.load_imbalance) {
            out.not_computable.push_back(
                "load_imbalance: no task carries positive units in any resource kind");
        }
    } else {
        out.not_computable.push_back("load_imbalance: trace has no task records");
    }

    // Weighted LI needs per-section li values.
    if (!trace.sections.empty()) {
        bool all_have_li = true;
        for (const auto& s : trace.sections) {
            if (!s.li) {
                all_have_li = false;
                break;
            }
        }
        if (all_have_li) {
            out.weighted_li = weighted_load_imbalance(trace.sections);
        } else {
            out.not_computable.push_back("weighted_li: missing li on one or more sections");
        }
    }

    // Memory fractions from task memory_bytes sums.
    bool any_memory = false;
    std::int64_t config_bytes = 0;
    std::int64_t training_bytes = 0;
    for (const auto& task : trace.tasks) {
        if (task.memory_bytes) {
            any_memory = true;
            config_bytes += task.memory_bytes->config;
            training_bytes += task.memory_bytes->training;
        }
    }
    if (!any_memory) {
        out.not_computable.push_back("memory_fractions: missing memory_bytes on task records");
    } else if (spec.onchip_memory_bytes <= 0) {
        out.not_computable.push_back(
            "memory_fractions: hardware spec has no on-chip capacity (onchip_memory_bytes)");
    } else {
        out.memory_fractions = memory_breakdown(config_bytes, training_bytes,
                                                spec.onchip_memory_bytes);
    }

    // Compute efficiency from the run's achieved TFLOP/s.
    if (!trace.metadata.achieved_tflops) {
        out.not_computable.push_back("compute_efficiency: missing achieved_tflops in metadata");
    } else if (spec.peak_flops_per_s.find(trace.metadata.precision) ==
               spec.peak_flops_per_s.end()) {
        out.not_computable.push_back("compute_efficiency: hardware spec has no peak for precision " +
                                     trace.metadata.precision);
    } else {
        const double eff =
            compute_efficiency(*trace.metadata.achieved_tflops, spec, trace.metadata.precision);
        if (eff > 1.0) {
            out.warnings.push_back("compute_efficiency " + std::to_string(eff) +
                                   " exceeds 1; clamped in the report (achieved above peak "
                                   "suggests a mis-set peak)");
        }
        out.compute_efficiency = eff;
    }
    out.compute_utilization = trace.metadata.compute_utilization;

    // Roofline placement from explicit AI or the workload profile.
    std::optional<double> ai = options.explicit_ai;
    if (!ai && trace.metadata.workload) {
        const WorkloadProfile profile =
            workload_profile(*trace.metadata.workload, options.activation, options.bytes_per_param);
        ai = profile.arithmetic_intensity;
    }
    if (!ai) {
        out.not_computable.push_back(
            "roofline: missing workload in metadata and no explicit ai supplied");
    } else if (!spec.global_bw_bytes_per_s) {
        out.not_computable.push_back("roofline: hardware spec " + spec.name +
                                     " has no global_bw_bytes_per_s; supply global_bw to enable "
                                     "roofline analysis");
    } else if (spec.peak_flops_per_s.find(trace.metadata.precision) ==
               spec.peak_flops_per_s.end()) {
        out.not_computable.push_back("roofline: hardware spec has no peak for precision " +
                                     trace.metadata.precision);
    } else {
        out.roofline =
            roofline_place(*ai, trace.metadata.achieved_tflops, spec, trace.metadata.precision);
    }
    if (ai) out.arithmetic_intensity = ai;

    return out;
}

}  // namespace flowbench
