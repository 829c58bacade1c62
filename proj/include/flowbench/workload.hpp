// SPDX-FileCopyrightText: © 2026 flowbench contributors
//
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "flowbench/errors.hpp"

namespace flowbench {

enum class ModelFamily {
    gpt2_style,    // learned positional embeddings, LayerNorm with bias, 4x MLP
    llama2_style,  // no positional table (rotary), RMSNorm, gated MLP, no biases
};

inline const char* to_string(ModelFamily f) {
    return f == ModelFamily::gpt2_style ? "gpt2-style" : "llama2-style";
}

inline ModelFamily model_family_from_string(const std::string& s) {
    if (s == "gpt2-style") return ModelFamily::gpt2_style;
    if (s == "llama2-style") return ModelFamily::llama2_style;
    throw ValidationError("family: unknown model family \"" + s + "\"");
}

/// Decoder-block training workload description. A model is an embedding
/// front-end plus `num_layers` identical decoder blocks plus a final norm;
/// num_layers = 0 (embeddings only) is legal and serves as the sweep baseline.
struct ModelConfig {
    ModelFamily family = ModelFamily::gpt2_style;
    std::int64_t hidden_size = 768;
    std::int64_t num_layers = 12;
    std::int64_t num_heads = 12;
    std::int64_t vocab_size = 50257;
    std::int64_t seq_len = 1024;
    std::int64_t batch_size = 1;
    double ffn_multiplier = 4.0;  // MLP width / hidden size; 4 for gpt2-style
    std::int64_t precision_bytes = 2;
    bool has_bias = true;  // true for gpt2-style, false for llama2-style

    void validate() const {
        if (hidden_size < 1) throw ValidationError("hidden_size must be >= 1");
        if (num_layers < 0) throw ValidationError("num_layers must be >= 0");
        if (num_heads < 1) throw ValidationError("num_heads must be >= 1");
        if (hidden_size % num_heads != 0) {
            throw ValidationError("hidden_size must be divisible by num_heads");
        }
        if (vocab_size < 1) throw ValidationError("vocab_size must be >= 1");
        if (seq_len < 1) throw ValidationError("seq_len must be >= 1");
        if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
        if (!(ffn_multiplier > 0.0)) throw ValidationError("ffn_multiplier must be > 0");
        if (precision_bytes < 1) throw ValidationError("precision_bytes must be >= 1");
    }
};

/// Knobs of the activation-memory estimate. The linear per-element
/// coefficient and the optional quadratic attention-score term are recorded
/// in report provenance so results stay auditable.
struct ActivationModel {
    double c_act = 34.0;                    // bytes-per-element slots per layer
    bool include_attention_scores = false;  // adds L*B*heads*S^2 elements
};

struct WorkloadProfile {
    std::int64_t param_count = 0;
    double flops_per_step = 0.0;
    double weight_traffic_bytes = 0.0;  // bytes_per_param * param_count
    double activation_bytes = 0.0;
    double arithmetic_intensity = 0.0;  // flops / (weight traffic + activations)
};

/// MLP inner width; fractional multipliers round to the nearest element.
inline std::int64_t ffn_width(const ModelConfig& cfg) {
    return std::llround(cfg.ffn_multiplier * static_cast<double>(cfg.hidden_size));
}

/// Parameters in one decoder block.
///
/// gpt2-style (h = hidden_size):
///   attention qkv 3h^2+3h, output h^2+h, MLP 4h^2+4h up and 4h^2+h down,
///   two LayerNorms 2*2h  ->  12h^2 + 13h
/// llama2-style (f = ffn width):
///   attention q,k,v,o 4h^2 (no bias), gated MLP 3*h*f, two RMSNorms 2h
inline std::int64_t block_param_count(const ModelConfig& cfg) {
    const std::int64_t h = cfg.hidden_size;
    if (cfg.family == ModelFamily::gpt2_style) {
        return 12 * h * h + 13 * h;
    }
    return 4 * h * h + 3 * h * ffn_width(cfg) + 2 * h;
}

/// Embedding front-end: token table, plus a learned positional table for
/// gpt2-style models. The output head is tied to the token table and not
/// counted again.
inline std::int64_t embedding_param_count(const ModelConfig& cfg) {
    std::int64_t params = cfg.vocab_size * cfg.hidden_size;
    if (cfg.family == ModelFamily::gpt2_style) params += cfg.seq_len * cfg.hidden_size;
    return params;
}

/// Final norm after the block stack: LayerNorm (scale + bias) for
/// gpt2-style, RMSNorm (scale only) for llama2-style.
inline std::int64_t final_norm_param_count(const ModelConfig& cfg) {
    return cfg.family == ModelFamily::gpt2_style ? 2 * cfg.hidden_size : cfg.hidden_size;
}

inline std::int64_t param_count(const ModelConfig& cfg) {
    cfg.validate();
    return embedding_param_count(cfg) + cfg.num_layers * block_param_count(cfg) +
           final_norm_param_count(cfg);
}

/// Human-readable statement of the counting formula, embedded in reports.
inline std::string param_count_formula(const ModelConfig& cfg) {
    if (cfg.family == ModelFamily::gpt2_style) {
        return "vocab*h + seq*h (positional) + layers*(12h^2 + 13h) + 2h (final LayerNorm)";
    }
    return "vocab*h + layers*(4h^2 + 3*h*ffn + 2h) + h (final RMSNorm), ffn = round(ffn_multiplier*h)";
}

/// Training cost per optimizer step: 6 FLOPs per parameter per token
/// (2x forward, 4x backward).
inline double training_flops(const ModelConfig& cfg, std::int64_t params) {
    if (params < 0) throw ValidationError("param count must be >= 0");
    return 6.0 * static_cast<double>(params) * static_cast<double>(cfg.batch_size) *
           static_cast<double>(cfg.seq_len);
}

/// Activation bytes per step:
///   layers * batch * seq * hidden * c_act * precision_bytes
/// plus, when enabled, the attention-score term
///   layers * batch * heads * seq^2 * precision_bytes.
inline double activation_memory_bytes(const ModelConfig& cfg, const ActivationModel& model = {}) {
    cfg.validate();
    const double layers = static_cast<double>(cfg.num_layers);
    const double batch = static_cast<double>(cfg.batch_size);
    const double seq = static_cast<double>(cfg.seq_len);
    double bytes = layers * batch * seq * static_cast<double>(cfg.hidden_size) * model.c_act *
                   static_cast<double>(cfg.precision_bytes);
    if (model.include_attention_scores) {
        bytes += layers * batch * static_cast<double>(cfg.num_heads) * seq * seq *
                 static_cast<double>(cfg.precision_bytes);
    }
    return bytes;
}

/// FLOPs per byte of memory traffic. Weight traffic defaults to 4 bytes per
/// parameter; pass 2 for half-precision traffic studies.
inline double arithmetic_intensity(std::int64_t params, double flops, double activation_bytes,
                                   double bytes_per_param = 4.0) {
    const double denom = bytes_per_param * static_cast<double>(params) + activation_bytes;
    if (!(denom > 0.0)) throw ValidationError("arithmetic_intensity: empty memory traffic");
    return flops / denom;
}

inline WorkloadProfile workload_profile(const ModelConfig& cfg, const ActivationModel& model = {},
                                        double bytes_per_param = 4.0) {
    WorkloadProfile p;
    p.param_count = param_count(cfg);
    p.flops_per_step = training_flops(cfg, p.param_count);
    p.weight_traffic_bytes = bytes_per_param * static_cast<double>(p.param_count);
    p.activation_bytes = activation_memory_bytes(cfg, model);
    p.arithmetic_intensity =
        arithmetic_intensity(p.param_count, p.flops_per_step, p.activation_bytes, bytes_per_param);
    return p;
}

}  // namespace flowbench
