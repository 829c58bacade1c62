// SPDX-FileCopyrightText: © 2026 flowbench contributors
//
// SPDX-License-Identifier: Apache-2.0
//
// Decoder graphs, section partitioning, kernel placement and synthetic traces.

#include <cstdint>
#include <set>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "flowbench/hardware.hpp"
#include "flowbench/simulator.hpp"
#include "flowbench/tier1.hpp"

using namespace flowbench;

namespace {

std::int64_t decoder_cost(const ModelConfig& cfg) {
    // One decoder packed into a single section exposes the calibrated totals.
    const DecoderGraph graph = build_decoder_graph(cfg);
    DecoderGraph one = graph;
    one.num_layers = 1;
    PartitionOptions opts;
    opts.budget = 1 << 20;
    const SectionPlan plan = partition_sections(one, CompileMode::O3, opts);
    REQUIRE(plan.sections.size() == 1);
    return std::max(plan.sections[0].pcu, plan.sections[0].pmu);
}

}  // namespace

TEST_CASE("the decoder operator vocabulary is fixed") {
    const auto& vocab = decoder_op_vocabulary();
    REQUIRE(vocab.size() == 11);
    const DecoderGraph graph = build_decoder_graph(ModelConfig{});
    REQUIRE(graph.ops.size() == vocab.size());
    for (std::size_t i = 0; i < vocab.size(); ++i) {
        CHECK(graph.ops[i].name == vocab[i]);
    }
}

TEST_CASE("decoder op costs follow the 2mnk rule") {
    const DecoderGraph graph = build_decoder_graph(ModelConfig{});  // 768 wide, B=1, S=1024
    CHECK(graph.ops[1].name == "qkv_proj");
    CHECK(graph.ops[1].flops == 3623878656.0);  // 2 * (3*768) * 768 * 1024
    CHECK(graph.ops[7].name == "mlp_up");
    CHECK(graph.ops[7].flops == 4831838208.0);  // 2 * 768 * 3072 * 1024
    CHECK(graph.ops[5].flops == 786432.0);      // residual: one add per element
    // All ops have positive cost and traffic.
    for (const auto& op : graph.ops) {
        CHECK(op.flops > 0.0);
        CHECK(op.io_bytes > 0.0);
    }
}

TEST_CASE("O0 keeps one section per operator") {
    ModelConfig cfg;
    cfg.num_layers = 24;
    const SectionPlan plan = partition_sections(build_decoder_graph(cfg), CompileMode::O0);
    REQUIRE(plan.sections.size() == 11);
    for (const auto& s : plan.sections) {
        CHECK(s.invocations == 24);
        CHECK(s.ops.size() == 1);
        CHECK(s.pcu >= 1);
        CHECK(s.pmu >= 1);
    }
}

TEST_CASE("O1 fuses attention and MLP ops into module sections") {
    for (const std::int64_t layers : {6, 12, 24, 48}) {
        ModelConfig cfg;
        cfg.num_layers = layers;
        const SectionPlan plan = partition_sections(build_decoder_graph(cfg), CompileMode::O1);
        REQUIRE(plan.sections.size() == 6);  // norm1 attention residual1 norm2 mlp residual2
        CHECK(plan.sections[1].label == "attention");
        CHECK(plan.sections[1].ops.size() == 4);
        CHECK(plan.sections[4].label == "mlp");
        CHECK(plan.sections[4].ops.size() == 3);
        for (const auto& s : plan.sections) CHECK(s.invocations == layers);
    }
}

TEST_CASE("O3 packs whole decoders under the unit budget") {
    ModelConfig cfg;
    const std::int64_t cost = decoder_cost(cfg);

    // Budget for exactly two decoders per section: ceil(L/2) sections.
    PartitionOptions two;
    two.budget = 2 * cost;
    for (const std::int64_t layers : {1, 2, 3, 7, 12, 48}) {
        cfg.num_layers = layers;
        const SectionPlan plan =
            partition_sections(build_decoder_graph(cfg), CompileMode::O3, two);
        CHECK(static_cast<std::int64_t>(plan.sections.size()) == (layers + 1) / 2);
        // Every decoder is covered exactly once.
        std::set<std::int64_t> covered;
        for (const auto& s : plan.sections) {
            REQUIRE(s.decoder_range.has_value());
            for (std::int64_t d = s.decoder_range->first; d <= s.decoder_range->second; ++d) {
                CHECK(covered.insert(d).second);
            }
            CHECK(s.invocations == 1);
            CHECK(std::max(s.pcu, s.pmu) <= two.budget);
        }
        CHECK(static_cast<std::int64_t>(covered.size()) == layers);
    }

    // Section count never decreases as the model grows.
    std::size_t previous = 0;
    for (std::int64_t layers = 1; layers <= 40; ++layers) {
        cfg.num_layers = layers;
        const SectionPlan plan = partition_sections(build_decoder_graph(cfg), CompileMode::O3);
        CHECK(plan.sections.size() >= previous);
        previous = plan.sections.size();
    }
}

TEST_CASE("O3 splits oversized decoders and enforces the split limit") {
    ModelConfig cfg;
    cfg.num_layers = 2;
    const DecoderGraph graph = build_decoder_graph(cfg);
    const std::int64_t cost = decoder_cost(cfg);

    // Smallest budget that still fits every single op, taken from the O0 plan.
    std::int64_t max_op = 0;
    for (const auto& s : partition_sections(graph, CompileMode::O0).sections) {
        max_op = std::max(max_op, std::max(s.pcu, s.pmu));
    }
    // A feasible budget that cannot cover the decoder in three chunks forces
    // more than max_splits_per_decoder sections, which the default rejects.
    PartitionOptions tight;
    tight.budget = std::max(max_op, cost / 4);
    REQUIRE(3 * tight.budget < cost);  // guarantees at least four chunks
    CHECK_THROWS_MATCHES(partition_sections(graph, CompileMode::O3, tight), ValidationError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("max_splits_per_decoder")));

    // Raising the limit makes the same budget feasible.
    PartitionOptions loose = tight;
    loose.max_splits_per_decoder = 11;
    const SectionPlan split = partition_sections(graph, CompileMode::O3, loose);
    CHECK(split.sections.size() >= 8);  // >= 4 chunks per decoder, 2 decoders
    CHECK(split.sections.size() % 2 == 0);
    for (const auto& s : split.sections) {
        CHECK(std::max(s.pcu, s.pmu) <= loose.budget);
        REQUIRE(s.decoder_range.has_value());
        CHECK(s.decoder_range->first == s.decoder_range->second);
    }

    // A budget below a single op's demand can never be satisfied.
    PartitionOptions impossible;
    impossible.budget = 1;
    impossible.max_splits_per_decoder = 1000;
    CHECK_THROWS_MATCHES(partition_sections(graph, CompileMode::O3, impossible), ValidationError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("smaller than op")));

    DecoderGraph empty;
    empty.num_layers = 4;
    CHECK_THROWS_AS(partition_sections(empty, CompileMode::O0), ValidationError);
    DecoderGraph no_layers = graph;
    no_layers.num_layers = 0;
    CHECK_THROWS_AS(partition_sections(no_layers, CompileMode::O0), ValidationError);
}

TEST_CASE("wafer placement grows with the model until the cap binds") {
    const HardwareSpec chip = builtin_spec("wse2");
    const double pe_total = 850000.0;

    const PlacementPlan one = wse_place(1, chip);
    REQUIRE(one.kernels.size() == 1);
    CHECK(one.kernels[0].compute_pes == 154275);
    CHECK(one.kernels[0].transmission_pes == 126225);
    CHECK(one.total_pes_used == 280500);

    // Small models get the preferred kernel size; utilization rises linearly.
    const PlacementPlan two = wse_place(2, chip);
    CHECK(two.total_pes_used == 2 * 280500);

    // From three layers on, the 93% cap binds and utilization plateaus.
    const PlacementPlan three = wse_place(3, chip);
    CHECK(three.total_pes_used == 790500);  // exactly 0.93 * 850000
    CHECK(static_cast<double>(three.total_pes_used) / pe_total == 0.93);

    std::int64_t previous = 0;
    for (std::int64_t layers = 1; layers <= 77; ++layers) {
        const PlacementPlan plan = wse_place(layers, chip);
        CHECK(static_cast<double>(plan.total_pes_used) <= 0.93 * pe_total);
        if (layers >= 3) {
            // The plateau stays within one percentage point of the cap.
            CHECK(static_cast<double>(plan.total_pes_used) / pe_total >= 0.92);
        } else {
            CHECK(plan.total_pes_used > previous);
        }
        previous = plan.total_pes_used;
        // Per-layer kernels are uniform.
        for (const auto& k : plan.kernels) {
            CHECK(k.compute_pes == plan.kernels[0].compute_pes);
            CHECK(k.transmission_pes == plan.kernels[0].transmission_pes);
        }
    }

    CHECK_THROWS_MATCHES(wse_place(78, chip), ValidationError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("78")));
    CHECK_THROWS_AS(wse_place(120, chip), ValidationError);
    CHECK_THROWS_AS(wse_place(0, chip), ValidationError);
    CHECK_THROWS_AS(wse_place(4, builtin_spec("sn30-rdu")), ValidationError);  // no PE total
}

TEST_CASE("a synthesized placement trace is perfectly balanced") {
    const HardwareSpec chip = builtin_spec("wse2");
    const PlacementPlan plan = wse_place(12, chip);
    const TraceSet trace = synthesize_trace(plan, "wse2");
    CHECK(trace.tasks.size() == 24);  // compute + transmission per kernel
    CHECK(trace.metadata.granularity == "kernel");
    CHECK(trace.metadata.provenance == Provenance::compile_time);

    const Tier1Metrics m = compute_tier1(trace, chip);
    REQUIRE(m.load_imbalance.has_value());
    CHECK(*m.load_imbalance == 1.0);  // uniform kernels, equal throughputs
    CHECK(m.allocation_ratio.at(ResourceKind::PE) ==
          static_cast<double>(plan.total_pes_used) / 850000.0);
}

TEST_CASE("a synthesized section trace follows the linear cost model") {
    ModelConfig cfg;
    cfg.num_layers = 8;
    const SectionPlan plan = partition_sections(build_decoder_graph(cfg), CompileMode::O1);
    const TraceSet trace = synthesize_trace(plan, "sn30-rdu");
    REQUIRE(trace.sections.size() == plan.sections.size());
    for (std::size_t i = 0; i < plan.sections.size(); ++i) {
        const auto& s = plan.sections[i];
        const auto& rec = trace.sections[i];
        CHECK(rec.units.at(ResourceKind::PCU) == s.pcu);
        CHECK(rec.units.at(ResourceKind::PMU) == s.pmu);
        CHECK(rec.invocations == s.invocations);
        CHECK(rec.runtime_s == static_cast<double>(s.invocations) * s.flops /
                                   (static_cast<double>(s.pcu) * 1e9));
    }
    // The synthesized trace is a valid flowbench trace end to end.
    CHECK(emit_trace(parse_trace(emit_trace(trace))) == emit_trace(trace));
}

TEST_CASE("a synthesized pipeline trace reports the bottleneck throughput") {
    const PipelinePlan plan = pp_assign(18, 8);
    REQUIRE(plan.stage_layers == std::vector<std::int64_t>{0, 3, 3, 3, 3, 2, 2, 2});
    const HardwareSpec chip = builtin_spec("bow2000-ipu");
    const TraceSet trace = synthesize_trace(plan, "bow2000-ipu", chip);
    CHECK(trace.metadata.parallelism.strategy == ParallelStrategy::PP);
    CHECK(trace.metadata.parallelism.degree == 8);
    REQUIRE(trace.metadata.system_throughput.has_value());
    CHECK(*trace.metadata.system_throughput == 1e3 / 3.0);  // capacity / bottleneck layers
    CHECK(trace.tasks.size() == 7);  // the embedding stage carries no decoder task
    CHECK(trace.tasks[0].task_id == "stage_01");
    CHECK(trace.tasks[0].throughput == 1e3 / 3.0);
    CHECK(trace.tasks[6].throughput == 500.0);
    for (const auto& t : trace.tasks) CHECK(t.units.at(ResourceKind::tile) == 1472);

    CHECK_THROWS_AS(synthesize_trace(plan, "wse2", builtin_spec("wse2")), ValidationError);
}

TEST_CASE("plans serialize to JSON sidecars") {
    ModelConfig cfg;
    cfg.num_layers = 4;
    const json section = plan_to_json(partition_sections(build_decoder_graph(cfg), CompileMode::O1));
    CHECK(section.at("kind") == "section_plan");
    CHECK(section.at("mode") == "O1");
    CHECK(section.at("total_layers") == 4);
    CHECK(section.at("sections").size() == 6);
    CHECK(section.at("sections")[1].at("units").at("PCU").get<std::int64_t>() > 0);

    const json placement = plan_to_json(wse_place(2, builtin_spec("wse2")));
    CHECK(placement.at("kind") == "placement_plan");
    CHECK(placement.at("cap") == 0.93);
    CHECK(placement.at("kernels").size() == 2);

    const json pipeline = plan_to_json(pp_assign(12, 4));
    CHECK(pipeline.at("kind") == "pipeline_plan");
    CHECK(pipeline.at("stage_layers") == json::array({0, 4, 4, 4}));
    CHECK(pipeline.at("embedding_stage") == 0);
    CHECK(pipeline.at("predicted_relative_throughput") == 0.25);
}

TEST_CASE("compile mode names parse case-insensitively") {
    CHECK(compile_mode_from_string("O0") == CompileMode::O0);
    CHECK(compile_mode_from_string("o1") == CompileMode::O1);
    CHECK(compile_mode_from_string("o3") == CompileMode::O3);
    CHECK_THROWS_MATCHES(compile_mode_from_string("O2"), ValidationError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("unknown compile mode")));
}
