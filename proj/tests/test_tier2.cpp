// SPDX-FileCopyrightText: © 2026 flowbench contributors
//
// SPDX-License-Identifier: Apache-2.0
//
// Cross-run metrics: scaling sweeps, pipeline balance, batch knees,
// precision gains.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "flowbench/hardware.hpp"
#include "flowbench/tier2.hpp"
#include "flowbench/trace.hpp"

using namespace flowbench;

namespace {

TraceSet run(std::string platform, ParallelStrategy strategy, std::int64_t degree,
             double system_throughput) {
    TraceSet t;
    t.metadata.platform = std::move(platform);
    t.metadata.precision = "fp16";
    t.metadata.parallelism.strategy = strategy;
    t.metadata.parallelism.degree = degree;
    t.metadata.system_throughput = system_throughput;
    TaskRecord task;
    task.task_id = "step";
    task.units[ResourceKind::PE] = 1;
    task.throughput = system_throughput;
    t.tasks.push_back(task);
    return t;
}

bool mentions(const std::vector<std::string>& list, const char* needle) {
    for (const auto& s : list) {
        if (s.find(needle) != std::string::npos) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("scaling efficiency is speedup over degree") {
    const ScalingResult two = scaling_efficiency(660000.0, 980000.0, 2);
    CHECK(two.speedup == 1.4848484848484849);
    CHECK(two.efficiency == 0.7424242424242424);
    CHECK(two.commentary.empty());

    const ScalingResult identity = scaling_efficiency(123.0, 123.0, 1);
    CHECK(identity.speedup == 1.0);
    CHECK(identity.efficiency == 1.0);

    const ScalingResult bad = scaling_efficiency(100.0, 50.0, 2);
    CHECK(bad.efficiency == 0.25);
    REQUIRE_FALSE(bad.commentary.empty());
    CHECK(bad.commentary[0].find("sub-linear") != std::string::npos);

    // Exactly half-efficient is not yet flagged; the comment is for below 0.5.
    CHECK(scaling_efficiency(100.0, 100.0, 2).commentary.empty());

    CHECK_THROWS_AS(scaling_efficiency(0.0, 10.0, 2), ValidationError);
    CHECK_THROWS_AS(scaling_efficiency(10.0, 10.0, 0), ValidationError);
}

TEST_CASE("weight-streaming penalty is the relative throughput loss") {
    CHECK(weight_streaming_penalty(660000.0, 530000.0) == 0.19696969696969702);
    CHECK(weight_streaming_penalty(42.0, 42.0) == 0.0);
    CHECK(weight_streaming_penalty(100.0, 0.0) == 1.0);
    // Streaming faster than resident shows up as a negative penalty.
    CHECK(weight_streaming_penalty(100.0, 120.0) ==
          Catch::Approx(-0.2).epsilon(1e-12));
    CHECK_THROWS_AS(weight_streaming_penalty(0.0, 10.0), ValidationError);
    CHECK_THROWS_AS(weight_streaming_penalty(10.0, -1.0), ValidationError);
}

TEST_CASE("tensor-parallel degradation per sweep step") {
    const std::vector<std::pair<std::int64_t, double>> runs = {{2, 1540.0}, {4, 945.0}, {8, 918.0}};
    const std::vector<TpStep> steps = tp_degradation(runs, 2);
    REQUIRE(steps.size() == 2);
    CHECK(steps[0].from_degree == 2);
    CHECK(steps[0].to_degree == 4);
    CHECK(steps[0].degradation == 0.38636363636363635);
    CHECK(steps[0].crosses_machine_boundary);  // 2 devices fit one node, 4 do not
    CHECK(steps[1].degradation == 0.02857142857142858);
    CHECK_FALSE(steps[1].crosses_machine_boundary);

    // Input order does not matter; steps are formed on sorted degrees.
    const std::vector<std::pair<std::int64_t, double>> shuffled = {{8, 918.0}, {2, 1540.0},
                                                                   {4, 945.0}};
    const std::vector<TpStep> same = tp_degradation(shuffled, 2);
    REQUIRE(same.size() == 2);
    CHECK(same[0].degradation == steps[0].degradation);
    CHECK(same[1].degradation == steps[1].degradation);

    // With a big enough node no step crosses a machine boundary.
    for (const TpStep& step : tp_degradation(runs, 8)) {
        CHECK_FALSE(step.crosses_machine_boundary);
    }

    CHECK_THROWS_MATCHES(tp_degradation({{2, 100.0}}, 2), ValidationError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("at least two")));
    CHECK_THROWS_MATCHES(tp_degradation({{2, 100.0}, {2, 90.0}}, 2), ValidationError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("duplicate TP degree 2")));
    CHECK_THROWS_AS(tp_degradation({{2, 0.0}, {4, 90.0}}, 2), ValidationError);
    CHECK_THROWS_AS(tp_degradation(runs, 0), ValidationError);
}

TEST_CASE("pipeline throughput is limited by the fullest stage") {
    CHECK(pp_system_throughput({2, 2, 2}, 100.0) == 50.0);
    CHECK(pp_system_throughput({1, 4, 1}, 100.0) == 25.0);
    CHECK(pp_system_throughput({3, 2}, 600.0) == 200.0);
    CHECK(pp_system_throughput({0, 4, 4, 4}, 80.0) == 20.0);  // empty stages are fine
    CHECK(pp_system_throughput({2, 3}, 600.0) == pp_system_throughput({3, 2}, 600.0));
    CHECK_THROWS_MATCHES(pp_system_throughput({0, 0}, 100.0), ValidationError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("all stages are empty")));
    CHECK_THROWS_AS(pp_system_throughput({-1, 2}, 100.0), ValidationError);
    CHECK_THROWS_AS(pp_system_throughput({2, 2}, 0.0), ValidationError);
}

TEST_CASE("pipeline assignment balances layers with a pinned embedding") {
    const PipelinePlan p30 = pp_assign(30, 16);
    REQUIRE(p30.stage_layers.size() == 16);
    CHECK(p30.embedding_stage == 0);
    CHECK(p30.stage_layers[0] == 0);
    for (std::size_t i = 1; i < p30.stage_layers.size(); ++i) {
        CHECK(p30.stage_layers[i] == 2);  // 30 layers over 15 compute stages
    }
    CHECK(p30.predicted_relative_throughput == 0.5);

    const PipelinePlan p48 = pp_assign(48, 16);
    std::int64_t total = 0;
    std::int64_t max_load = 0;
    for (const std::int64_t l : p48.stage_layers) {
        total += l;
        max_load = std::max(max_load, l);
    }
    CHECK(total == 48);
    CHECK(max_load == 4);  // ceil(48 / 15)
    CHECK(p48.stage_layers[1] == 4);  // extras go to the earliest compute stages
    CHECK(p48.stage_layers[15] == 3);

    const PipelinePlan tiny = pp_assign(1, 2);
    CHECK(tiny.stage_layers == std::vector<std::int64_t>{0, 1});

    const PipelinePlan unpinned = pp_assign(5, 1, /*pin_embedding=*/false);
    CHECK(unpinned.stage_layers == std::vector<std::int64_t>{5});
    CHECK_FALSE(unpinned.embedding_stage.has_value());

    CHECK_THROWS_MATCHES(pp_assign(10, 1), ValidationError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("pinned to the embedding")));
    CHECK_THROWS_AS(pp_assign(0, 4), ValidationError);

    // Balanced-optimality spot checks: the max load equals ceil(L / (d - 1)).
    for (const std::int64_t layers : {1, 2, 7, 12, 30, 48, 97, 1000}) {
        for (const std::int64_t devices : {2, 3, 4, 8, 16, 64}) {
            const PipelinePlan plan = pp_assign(layers, devices);
            std::int64_t sum = 0;
            std::int64_t max_l = 0;
            for (const std::int64_t l : plan.stage_layers) {
                sum += l;
                max_l = std::max(max_l, l);
            }
            CHECK(sum == layers);
            CHECK(max_l == (layers + devices - 2) / (devices - 1));
            // Loads never increase after the pinned stage (extras lead).
            for (std::size_t i = 2; i < plan.stage_layers.size(); ++i) {
                CHECK(plan.stage_layers[i] <= plan.stage_layers[i - 1]);
            }
        }
    }
}

TEST_CASE("batch knee finds where doubling stops paying") {
    const std::vector<std::pair<std::int64_t, double>> sweep = {
        {25, 100.0}, {50, 200.0}, {100, 400.0}, {200, 800.0}, {400, 808.0}, {800, 816.08}};
    CHECK(batch_knee(sweep, 0.10) == 200);

    // Perfect linear scaling: no knee.
    CHECK_FALSE(batch_knee({{1, 100.0}, {2, 200.0}, {4, 400.0}}, 0.10).has_value());

    // Non-power-of-two spacing normalizes per doubling: tripling the batch
    // for triple the throughput is the same 100% per-doubling gain.
    CHECK_FALSE(batch_knee({{1, 100.0}, {3, 300.0}, {9, 900.0}}, 0.10).has_value());

    // A temporary dip does not move the knee earlier than the final plateau.
    const std::vector<std::pair<std::int64_t, double>> dip = {
        {1, 100.0}, {2, 105.0}, {4, 210.0}, {8, 420.0}, {16, 430.0}};
    CHECK(batch_knee(dip, 0.10) == 8);

    CHECK_THROWS_MATCHES(batch_knee({{1, 1.0}, {2, 2.0}}, 0.10), ValidationError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("at least three")));
    CHECK_THROWS_MATCHES(batch_knee({{4, 1.0}, {2, 2.0}, {8, 3.0}}, 0.10), ValidationError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("unsorted")));
    CHECK_THROWS_AS(batch_knee({{1, 1.0}, {2, 0.0}, {4, 3.0}}, 0.10), ValidationError);
    CHECK_THROWS_AS(batch_knee(sweep, 0.0), ValidationError);
}

TEST_CASE("precision gain is the relative improvement over the baseline") {
    CHECK(precision_gain(154000.0, 188000.0) == 0.22077922077922074);
    CHECK(precision_gain(527000.0, 583000.0) == 0.10626185958254264);
    CHECK(precision_gain(631.0, 847.0) == 0.3423137876386688);
    CHECK(precision_gain(100.0, 100.0) == 0.0);
    CHECK_THROWS_AS(precision_gain(0.0, 10.0), ValidationError);
    CHECK_THROWS_AS(precision_gain(10.0, -1.0), ValidationError);
}

TEST_CASE("tier-2 aggregation over sweep groups") {
    const HardwareSpec wse2 = builtin_spec("wse2");

    std::map<std::string, std::vector<TraceSet>> sweeps;
    sweeps["dp"] = {run("wse2", ParallelStrategy::none, 1, 660000.0),
                    run("wse2", ParallelStrategy::DP, 2, 980000.0),
                    run("wse2", ParallelStrategy::DP, 4, 1840000.0),
                    run("wse2", ParallelStrategy::DP, 8, 3600000.0),
                    run("wse2", ParallelStrategy::weight_streaming, 1, 530000.0)};
    // TP runs on the RDU even though the manifest hardware is the WSE; the
    // machine boundary must come from the RDU's devices-per-node.
    sweeps["tp"] = {run("sn30-rdu", ParallelStrategy::TP, 2, 1540.0),
                    run("sn30-rdu", ParallelStrategy::TP, 4, 945.0),
                    run("sn30-rdu", ParallelStrategy::TP, 8, 918.0)};

    const Tier2Metrics m = compute_tier2(sweeps, wse2);
    REQUIRE(m.dp_scaling.size() == 4);
    CHECK(m.dp_scaling[0].degree == 1);
    CHECK(m.dp_scaling[0].speedup == 1.0);
    CHECK(m.dp_scaling[1].speedup == 1.4848484848484849);
    CHECK(m.dp_scaling[1].efficiency == 0.7424242424242424);
    CHECK(m.weight_streaming_penalty == 0.19696969696969702);
    REQUIRE(m.tp_steps.size() == 2);
    CHECK(m.tp_steps[0].crosses_machine_boundary);  // sn30 nodes hold 2 devices
    CHECK(m.not_computable.empty());
    CHECK(m.warnings.empty());

    // Two degree-1 runs: the one listed first is the baseline (stable order).
    std::map<std::string, std::vector<TraceSet>> tie;
    tie["dp"] = {run("wse2", ParallelStrategy::none, 1, 200.0),
                 run("wse2", ParallelStrategy::DP, 1, 100.0)};
    const Tier2Metrics t = compute_tier2(tie, wse2);
    REQUIRE(t.dp_scaling.size() == 2);
    CHECK(t.dp_scaling[0].throughput == 200.0);
    CHECK(t.dp_scaling[1].speedup == 0.5);

    // Degenerate and malformed groups surface diagnostics, not crashes.
    std::map<std::string, std::vector<TraceSet>> odd;
    odd["tp"] = {run("sn30-rdu", ParallelStrategy::TP, 2, 1540.0)};
    odd["mystery"] = {run("wse2", ParallelStrategy::none, 1, 1.0)};
    odd["pp"] = {run("bow2000-ipu", ParallelStrategy::DP, 2, 5.0)};
    TraceSet no_workload = run("wse2", ParallelStrategy::none, 1, 100.0);
    odd["batch"] = {no_workload};
    const Tier2Metrics d = compute_tier2(odd, wse2);
    CHECK(mentions(d.not_computable, "tp sweep: need at least two TP runs"));
    CHECK(mentions(d.warnings, "mystery"));
    CHECK(mentions(d.warnings, "pp sweep: ignoring"));
    CHECK(mentions(d.not_computable, "batch sweep"));
    CHECK(mentions(d.not_computable, "missing workload"));

    // Precision pairs group by platform in listing order.
    std::map<std::string, std::vector<TraceSet>> prec;
    TraceSet base = run("bow2000-ipu", ParallelStrategy::none, 1, 154000.0);
    base.metadata.precision = "fp32";
    TraceSet opt = run("bow2000-ipu", ParallelStrategy::none, 1, 188000.0);
    opt.metadata.precision = "mixed";
    TraceSet lonely = run("wse2", ParallelStrategy::none, 1, 1.0);
    prec["precision"] = {base, opt, lonely};
    const Tier2Metrics p = compute_tier2(prec, wse2);
    REQUIRE(p.precision_gains.size() == 1);
    CHECK(p.precision_gains[0].platform == "bow2000-ipu");
    CHECK(p.precision_gains[0].base_precision == "fp32");
    CHECK(p.precision_gains[0].optimized_precision == "mixed");
    CHECK(p.precision_gains[0].gain == 0.22077922077922074);
    CHECK(mentions(p.not_computable, "expected a (base, optimized) pair"));

    // PP sweeps summarize runs and recommend a balanced plan for the largest.
    std::map<std::string, std::vector<TraceSet>> pp;
    TraceSet small = run("bow2000-ipu", ParallelStrategy::PP, 4, 120.0);
    small.metadata.parallelism.stage_layers = std::vector<std::int64_t>{0, 2, 2, 2};
    TraceSet large = run("bow2000-ipu", ParallelStrategy::PP, 8, 129.0);
    large.metadata.parallelism.stage_layers = std::vector<std::int64_t>{0, 3, 3, 3, 3, 2, 2, 2};
    pp["pp"] = {small, large};
    const Tier2Metrics q = compute_tier2(pp, wse2);
    REQUIRE(q.pp_runs.size() == 2);
    CHECK(q.pp_runs[0].bottleneck_layers == 2);
    CHECK(q.pp_runs[1].bottleneck_layers == 3);
    REQUIRE(q.pp_recommendation.has_value());
    REQUIRE(q.pp_recommendation->stage_layers.size() == 8);  // largest degree wins
    std::int64_t rec_total = 0;
    for (const std::int64_t l : q.pp_recommendation->stage_layers) rec_total += l;
    CHECK(rec_total == 18);
    CHECK(q.pp_recommendation->stage_layers[0] == 0);

    // The batch knee respects the theta option.
    std::map<std::string, std::vector<TraceSet>> batch;
    std::vector<std::pair<std::int64_t, double>> points = {
        {25, 100.0}, {50, 200.0}, {100, 400.0}, {200, 800.0}, {400, 808.0}, {800, 816.08}};
    for (const auto& [b, tput] : points) {
        TraceSet r = run("wse2", ParallelStrategy::none, 1, tput);
        ModelConfig cfg;
        cfg.batch_size = b;
        r.metadata.workload = cfg;
        batch["batch"].push_back(std::move(r));
    }
    Tier2Options opts;
    opts.theta = 0.10;
    const Tier2Metrics k = compute_tier2(batch, wse2, opts);
    REQUIRE(k.batch_sweep.size() == 6);
    CHECK(k.batch_sweep.front().batch == 25);
    CHECK(k.batch_knee == 200);
    CHECK(k.batch_knee_theta == 0.10);
    // With a stricter threshold the 1% plateau still counts as scaling.
    Tier2Options strict;
    strict.theta = 0.005;
    CHECK_FALSE(compute_tier2(batch, wse2, strict).batch_knee.has_value());
}
