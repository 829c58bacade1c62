// SPDX-FileCopyrightText: © 2026 flowbench contributors
//
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "flowbench/errors.hpp"
#include "flowbench/hardware.hpp"
#include "flowbench/jsonutil.hpp"
#include "flowbench/numeric.hpp"
#include "flowbench/workload.hpp"

namespace flowbench {

constexpr int kTraceSchemaVersion = 1;

enum class TaskKind { compute, transmission };

inline const char* to_string(TaskKind k) {
    return k == TaskKind::compute ? "compute" : "transmission";
}

inline TaskKind task_kind_from_string(const std::string& s) {
    if (s == "compute") return TaskKind::compute;
    if (s == "transmission") return TaskKind::transmission;
    throw ValidationError("kind: expected \"compute\" or \"transmission\", got \"" + s + "\"");
}

enum class ParallelStrategy { none, DP, TP, PP, weight_streaming };

inline const char* to_string(ParallelStrategy s) {
    switch (s) {
        case ParallelStrategy::none: return "none";
        case ParallelStrategy::DP: return "DP";
        case ParallelStrategy::TP: return "TP";
        case ParallelStrategy::PP: return "PP";
        case ParallelStrategy::weight_streaming: return "weight-streaming";
    }
    throw InternalError("unhandled parallel strategy");
}

inline ParallelStrategy parallel_strategy_from_string(const std::string& s) {
    if (s == "none") return ParallelStrategy::none;
    if (s == "DP") return ParallelStrategy::DP;
    if (s == "TP") return ParallelStrategy::TP;
    if (s == "PP") return ParallelStrategy::PP;
    if (s == "weight-streaming") return ParallelStrategy::weight_streaming;
    throw ValidationError("strategy: unknown parallelism strategy \"" + s + "\"");
}

enum class ThroughputUnit { tokens_per_s, samples_per_s };

inline const char* to_string(ThroughputUnit u) {
    return u == ThroughputUnit::tokens_per_s ? "tokens/s" : "samples/s";
}

inline ThroughputUnit throughput_unit_from_string(const std::string& s) {
    if (s == "tokens/s") return ThroughputUnit::tokens_per_s;
    if (s == "samples/s") return ThroughputUnit::samples_per_s;
    throw ValidationError("throughput_unit_in_source: expected \"tokens/s\" or \"samples/s\"");
}

/// Where the recorded numbers came from: compiler estimates, measured
/// runtime counters, or values digitized from published tables.
enum class Provenance { compile_time, runtime, fixture };

inline const char* to_string(Provenance p) {
    switch (p) {
        case Provenance::compile_time: return "compile-time";
        case Provenance::runtime: return "runtime";
        case Provenance::fixture: return "fixture";
    }
    throw InternalError("unhandled provenance");
}

inline Provenance provenance_from_string(const std::string& s) {
    if (s == "compile-time") return Provenance::compile_time;
    if (s == "runtime") return Provenance::runtime;
    if (s == "fixture") return Provenance::fixture;
    throw ValidationError("provenance: expected compile-time, runtime or fixture");
}

struct MemoryBytes {
    std::int64_t config = 0;
    std::int64_t training = 0;
};

/// One profiled task (a kernel or an operator, depending on the trace's
/// granularity): the units assigned to it per resource kind and its
/// throughput in canonical tokens/s.
struct TaskRecord {
    std::string task_id;
    TaskKind kind = TaskKind::compute;
    std::map<ResourceKind, std::int64_t> units;
    double throughput = 0.0;
    std::optional<double> runtime_s;
    std::optional<MemoryBytes> memory_bytes;

    bool has_units(ResourceKind k) const {
        const auto it = units.find(k);
        return it != units.end() && it->second > 0;
    }
    bool has_any_units() const {
        for (const auto& [kind_, count] : units) {
            (void)kind_;
            if (count > 0) return true;
        }
        return false;
    }
};

/// One compiled section: its runtime weight, assigned units per kind,
/// invocation count, and optionally a pre-aggregated per-section load
/// imbalance value.
struct SectionRecord {
    std::int64_t section_id = 0;
    double runtime_s = 0.0;
    std::map<ResourceKind, std::int64_t> units;
    std::int64_t invocations = 1;
    std::optional<double> li;
};

struct Parallelism {
    ParallelStrategy strategy = ParallelStrategy::none;
    std::int64_t degree = 1;
    std::optional<std::vector<std::int64_t>> stage_layers;
};

struct RunMetadata {
    std::string platform;
    std::optional<ModelConfig> workload;
    Parallelism parallelism;
    std::string precision = "fp16";
    std::optional<double> achieved_tflops;
    std::optional<double> system_throughput;  // canonical tokens/s after normalization
    ThroughputUnit throughput_unit_in_source = ThroughputUnit::tokens_per_s;
    Provenance provenance = Provenance::runtime;
    std::string granularity;                   // e.g. "kernel" or "operator"; recorded verbatim
    std::optional<double> compute_utilization;  // opaque per-run scalar, ingested not computed
    std::optional<double> communication_overhead_s;  // ingested per-run scalar
};

struct TraceSet {
    RunMetadata metadata;
    std::vector<TaskRecord> tasks;
    std::vector<SectionRecord> sections;
    std::vector<std::string> warnings;  // parse-time diagnostics; never silently dropped

    void validate() const {
        if (tasks.empty() && sections.empty()) {
            throw ValidationError("trace: tasks and sections may not both be empty");
        }
        if (metadata.parallelism.strategy == ParallelStrategy::PP) {
            if (!metadata.parallelism.stage_layers) {
                throw ValidationError("parallelism: PP requires stage_layers");
            }
            if (static_cast<std::int64_t>(metadata.parallelism.stage_layers->size()) !=
                metadata.parallelism.degree) {
                throw ValidationError("parallelism: stage_layers length must equal degree");
            }
        }
    }
};

/// Convert a source-unit throughput to canonical tokens/s. samples/s
/// requires the sequence length; the conversion is recorded in report
/// provenance by the caller.
inline double normalize_throughput(double value, ThroughputUnit unit,
                                   std::optional<std::int64_t> seq_len) {
    if (value < 0.0) throw ValidationError("throughput must be >= 0");
    if (unit == ThroughputUnit::tokens_per_s) return value;
    if (!seq_len) {
        throw ValidationError("throughput given in samples/s but no seq_len available");
    }
    if (*seq_len < 1) throw ValidationError("seq_len must be >= 1 to convert samples/s");
    return value * static_cast<double>(*seq_len);
}

// ---------------------------------------------------------------------------
// ModelConfig <-> JSON (shared by trace metadata and manifests).
// ---------------------------------------------------------------------------

inline ModelConfig model_config_from_json(const json& doc, const std::string& what) {
    require_type(doc, json::value_t::object, what);
    reject_unknown_fields(doc,
                          {"family", "hidden_size", "num_layers", "num_heads", "vocab_size",
                           "seq_len", "batch_size", "ffn_multiplier", "precision_bytes",
                           "has_bias"},
                          what);
    ModelConfig cfg;
    if (const auto it = doc.find("family"); it != doc.end()) {
        require_type(*it, json::value_t::string, what + ".family");
        cfg.family = model_family_from_string(it->get<std::string>());
        cfg.has_bias = cfg.family == ModelFamily::gpt2_style;
        cfg.ffn_multiplier = cfg.family == ModelFamily::gpt2_style ? 4.0 : 8.0 / 3.0;
    }
    const auto read_int = [&](const char* field, std::int64_t& out) {
        if (const auto it = doc.find(field); it != doc.end()) {
            out = get_int(*it, what + "." + field);
        }
    };
    read_int("hidden_size", cfg.hidden_size);
    read_int("num_layers", cfg.num_layers);
    read_int("num_heads", cfg.num_heads);
    read_int("vocab_size", cfg.vocab_size);
    read_int("seq_len", cfg.seq_len);
    read_int("batch_size", cfg.batch_size);
    read_int("precision_bytes", cfg.precision_bytes);
    if (const auto it = doc.find("ffn_multiplier"); it != doc.end()) {
        cfg.ffn_multiplier = get_number(*it, what + ".ffn_multiplier");
    }
    if (const auto it = doc.find("has_bias"); it != doc.end()) {
        require_type(*it, json::value_t::boolean, what + ".has_bias");
        cfg.has_bias = it->get<bool>();
    }
    cfg.validate();
    return cfg;
}

inline json model_config_to_json(const ModelConfig& cfg) {
    json doc;
    doc["family"] = to_string(cfg.family);
    doc["hidden_size"] = cfg.hidden_size;
    doc["num_layers"] = cfg.num_layers;
    doc["num_heads"] = cfg.num_heads;
    doc["vocab_size"] = cfg.vocab_size;
    doc["seq_len"] = cfg.seq_len;
    doc["batch_size"] = cfg.batch_size;
    doc["ffn_multiplier"] = cfg.ffn_multiplier;
    doc["precision_bytes"] = cfg.precision_bytes;
    doc["has_bias"] = cfg.has_bias;
    return doc;
}

// ---------------------------------------------------------------------------
// Trace parsing. Format: UTF-8 line-delimited JSON records. Line 1 must be
// {"record":"metadata","schema_version":1,...}; subsequent lines carry
// "record":"task" or "record":"section".
// ---------------------------------------------------------------------------

namespace detail {

inline std::map<ResourceKind, std::int64_t> units_from_json(const json& v,
                                                            const std::string& field) {
    require_type(v, json::value_t::object, field);
    std::map<ResourceKind, std::int64_t> units;
    for (const auto& [key, value] : v.items()) {
        const ResourceKind kind = resource_kind_from_string(key);
        const std::int64_t count = get_int(value, field + "." + key);
        if (count < 0) throw ValidationError(field + "." + key + " must be >= 0");
        units[kind] = count;
    }
    return units;
}

inline json units_to_json(const std::map<ResourceKind, std::int64_t>& units) {
    json v = json::object();
    for (const auto& [kind, count] : units) v[to_string(kind)] = count;
    return v;
}

inline RunMetadata metadata_from_json(const json& rec) {
    reject_unknown_fields(rec,
                          {"record", "schema_version", "platform", "workload", "parallelism",
                           "precision", "achieved_tflops", "system_throughput",
                           "throughput_unit_in_source", "provenance", "granularity",
                           "compute_utilization", "communication_overhead_s"},
                          "metadata");
    const std::int64_t version = get_int(require_field(rec, "schema_version", "metadata"),
                                         "metadata.schema_version");
    if (version != kTraceSchemaVersion) {
        throw ValidationError("metadata: unsupported schema_version " + std::to_string(version) +
                              " (expected " + std::to_string(kTraceSchemaVersion) + ")");
    }
    RunMetadata meta;
    meta.platform = get_string(rec, "platform", "metadata");
    if (const auto it = rec.find("workload"); it != rec.end() && !it->is_null()) {
        meta.workload = model_config_from_json(*it, "metadata.workload");
    }
    if (const auto it = rec.find("parallelism"); it != rec.end() && !it->is_null()) {
        const json& par = *it;
        require_type(par, json::value_t::object, "metadata.parallelism");
        reject_unknown_fields(par, {"strategy", "degree", "stage_layers"},
                              "metadata.parallelism");
        meta.parallelism.strategy =
            parallel_strategy_from_string(get_string(par, "strategy", "metadata.parallelism"));
        if (const auto d = par.find("degree"); d != par.end()) {
            meta.parallelism.degree = get_int(*d, "metadata.parallelism.degree");
            if (meta.parallelism.degree < 1) {
                throw ValidationError("metadata.parallelism.degree must be >= 1");
            }
        }
        if (const auto s = par.find("stage_layers"); s != par.end() && !s->is_null()) {
            require_type(*s, json::value_t::array, "metadata.parallelism.stage_layers");
            std::vector<std::int64_t> stages;
            for (const auto& entry : *s) {
                const std::int64_t layers = get_int(entry, "metadata.parallelism.stage_layers[]");
                if (layers < 0) {
                    throw ValidationError("metadata.parallelism.stage_layers must be >= 0");
                }
                stages.push_back(layers);
            }
            meta.parallelism.stage_layers = std::move(stages);
        }
    }
    meta.precision = get_string(rec, "precision", "metadata");
    if (const auto it = rec.find("achieved_tflops"); it != rec.end() && !it->is_null()) {
        meta.achieved_tflops = get_number(*it, "metadata.achieved_tflops");
        if (*meta.achieved_tflops < 0.0) {
            throw ValidationError("metadata.achieved_tflops must be >= 0");
        }
    }
    if (const auto it = rec.find("throughput_unit_in_source"); it != rec.end() && !it->is_null()) {
        require_type(*it, json::value_t::string, "metadata.throughput_unit_in_source");
        meta.throughput_unit_in_source = throughput_unit_from_string(it->get<std::string>());
    }
    if (const auto it = rec.find("system_throughput"); it != rec.end() && !it->is_null()) {
        const double raw = get_number(*it, "metadata.system_throughput");
        if (raw < 0.0) throw ValidationError("metadata.system_throughput must be >= 0");
        std::optional<std::int64_t> seq;
        if (meta.workload) seq = meta.workload->seq_len;
        meta.system_throughput = normalize_throughput(raw, meta.throughput_unit_in_source, seq);
    }
    if (const auto it = rec.find("provenance"); it != rec.end() && !it->is_null()) {
        require_type(*it, json::value_t::string, "metadata.provenance");
        meta.provenance = provenance_from_string(it->get<std::string>());
    }
    if (const auto it = rec.find("granularity"); it != rec.end() && !it->is_null()) {
        require_type(*it, json::value_t::string, "metadata.granularity");
        meta.granularity = it->get<std::string>();
    }
    if (const auto it = rec.find("compute_utilization"); it != rec.end() && !it->is_null()) {
        meta.compute_utilization = get_number(*it, "metadata.compute_utilization");
    }
    if (const auto it = rec.find("communication_overhead_s"); it != rec.end() && !it->is_null()) {
        meta.communication_overhead_s = get_number(*it, "metadata.communication_overhead_s");
    }
    return meta;
}

inline TaskRecord task_from_json(const json& rec, ThroughputUnit unit,
                                 std::optional<std::int64_t> seq_len) {
    reject_unknown_fields(rec, {"record", "task_id", "kind", "units", "throughput", "runtime_s",
                                "memory_bytes"},
                          "task");
    TaskRecord task;
    task.task_id = get_string(rec, "task_id", "task");
    task.kind = task_kind_from_string(get_string(rec, "kind", "task"));
    task.units = units_from_json(require_field(rec, "units", "task"), "task.units");
    const double raw = get_number(require_field(rec, "throughput", "task"), "task.throughput");
    if (raw < 0.0) throw ValidationError("task.throughput must be >= 0");
    task.throughput = normalize_throughput(raw, unit, seq_len);
    if (const auto it = rec.find("runtime_s"); it != rec.end() && !it->is_null()) {
        const double runtime = get_number(*it, "task.runtime_s");
        if (runtime < 0.0) throw ValidationError("task.runtime_s must be >= 0");
        task.runtime_s = runtime;
    }
    if (const auto it = rec.find("memory_bytes"); it != rec.end() && !it->is_null()) {
        require_type(*it, json::value_t::object, "task.memory_bytes");
        reject_unknown_fields(*it, {"config", "training"}, "task.memory_bytes");
        MemoryBytes mem;
        if (const auto c = it->find("config"); c != it->end()) {
            mem.config = get_int(*c, "task.memory_bytes.config");
            if (mem.config < 0) throw ValidationError("task.memory_bytes.config must be >= 0");
        }
        if (const auto t = it->find("training"); t != it->end()) {
            mem.training = get_int(*t, "task.memory_bytes.training");
            if (mem.training < 0) throw ValidationError("task.memory_bytes.training must be >= 0");
        }
        task.memory_bytes = mem;
    }
    return task;
}

inline SectionRecord section_from_json(const json& rec) {
    reject_unknown_fields(rec, {"record", "section_id", "runtime_s", "units", "invocations", "li"},
                          "section");
    SectionRecord section;
    section.section_id = get_int(require_field(rec, "section_id", "section"),
                                 "section.section_id");
    section.runtime_s = get_number(require_field(rec, "runtime_s", "section"),
                                   "section.runtime_s");
    if (section.runtime_s < 0.0) throw ValidationError("section.runtime_s must be >= 0");
    section.units = units_from_json(require_field(rec, "units", "section"), "section.units");
    if (const auto it = rec.find("invocations"); it != rec.end() && !it->is_null()) {
        section.invocations = get_int(*it, "section.invocations");
        if (section.invocations < 1) throw ValidationError("section.invocations must be >= 1");
    }
    if (const auto it = rec.find("li"); it != rec.end() && !it->is_null()) {
        const double li = get_number(*it, "section.li");
        if (!(li > 0.0) || li > 1.0) {
            throw ValidationError("section.li must lie in (0, 1]");
        }
        section.li = li;
    }
    return section;
}

}  // namespace detail

inline TraceSet parse_trace(std::string_view text, const std::string& what = "trace") {
    TraceSet trace;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool saw_metadata = false;
    std::set<std::string> task_ids;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string_view line = eol == std::string_view::npos ? text.substr(pos)
                                                              : text.substr(pos, eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;

        const std::string where = what + ": line " + std::to_string(line_no);
        json rec;
        try {
            rec = parse_json(line, what);
        } catch (const ParseError& e) {
            throw ParseError(e.message(), line_no, e.column());
        }
        try {
            require_type(rec, json::value_t::object, "record");
            const std::string record = get_string(rec, "record", "record");
            if (!saw_metadata) {
                if (record != "metadata") {
                    throw ValidationError("first record must have record=\"metadata\"");
                }
                trace.metadata = detail::metadata_from_json(rec);
                saw_metadata = true;
                continue;
            }
            if (record == "metadata") {
                throw ValidationError("duplicate metadata record");
            } else if (record == "task") {
                std::optional<std::int64_t> seq;
                if (trace.metadata.workload) seq = trace.metadata.workload->seq_len;
                TaskRecord task = detail::task_from_json(
                    rec, trace.metadata.throughput_unit_in_source, seq);
                if (!task_ids.insert(task.task_id).second) {
                    throw ValidationError("duplicate task_id \"" + task.task_id + "\"");
                }
                if (!task.has_any_units()) {
                    trace.warnings.push_back(where + ": task \"" + task.task_id +
                                             "\" has zero units in every resource kind and is "
                                             "excluded from load-imbalance computation");
                }
                trace.tasks.push_back(std::move(task));
            } else if (record == "section") {
                trace.sections.push_back(detail::section_from_json(rec));
            } else {
                throw ValidationError("unknown record type \"" + record + "\"");
            }
        } catch (const ValidationError& e) {
            throw ValidationError(where + ": " + e.what());
        }
    }
    if (!saw_metadata) throw ValidationError(what + ": missing metadata record on line 1");
    trace.validate();
    return trace;
}

// ---------------------------------------------------------------------------
// Canonical emit: stable field order (sorted keys), shortest round-trip float
// formatting, throughputs already normalized to tokens/s. emit(parse(x)) is
// byte-identical to the canonicalized form of x and idempotent.
// ---------------------------------------------------------------------------

inline json metadata_to_json(const RunMetadata& meta) {
    json rec;
    rec["record"] = "metadata";
    rec["schema_version"] = kTraceSchemaVersion;
    rec["platform"] = meta.platform;
    if (meta.workload) rec["workload"] = model_config_to_json(*meta.workload);
    json par;
    par["strategy"] = to_string(meta.parallelism.strategy);
    par["degree"] = meta.parallelism.degree;
    if (meta.parallelism.stage_layers) par["stage_layers"] = *meta.parallelism.stage_layers;
    rec["parallelism"] = par;
    rec["precision"] = meta.precision;
    if (meta.achieved_tflops) rec["achieved_tflops"] = *meta.achieved_tflops;
    if (meta.system_throughput) rec["system_throughput"] = *meta.system_throughput;
    rec["throughput_unit_in_source"] = "tokens/s";  // canonical after normalization
    rec["provenance"] = to_string(meta.provenance);
    if (!meta.granularity.empty()) rec["granularity"] = meta.granularity;
    if (meta.compute_utilization) rec["compute_utilization"] = *meta.compute_utilization;
    if (meta.communication_overhead_s) {
        rec["communication_overhead_s"] = *meta.communication_overhead_s;
    }
    return rec;
}

inline std::string emit_trace(const TraceSet& trace) {
    trace.validate();
    std::string out;
    out += metadata_to_json(trace.metadata).dump();
    out += '\n';
    for (const auto& task : trace.tasks) {
        json rec;
        rec["record"] = "task";
        rec["task_id"] = task.task_id;
        rec["kind"] = to_string(task.kind);
        rec["units"] = detail::units_to_json(task.units);
        rec["throughput"] = task.throughput;
        if (task.runtime_s) rec["runtime_s"] = *task.runtime_s;
        if (task.memory_bytes) {
            rec["memory_bytes"] = {{"config", task.memory_bytes->config},
                                   {"training", task.memory_bytes->training}};
        }
        out += rec.dump();
        out += '\n';
    }
    for (const auto& section : trace.sections) {
        json rec;
        rec["record"] = "section";
        rec["section_id"] = section.section_id;
        rec["runtime_s"] = section.runtime_s;
        rec["units"] = detail::units_to_json(section.units);
        rec["invocations"] = section.invocations;
        if (section.li) rec["li"] = *section.li;
        out += rec.dump();
        out += '\n';
    }
    return out;
}

}  // namespace flowbench
