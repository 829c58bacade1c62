// SPDX-FileCopyrightText: © 2026 flowbench contributors
//
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end report assembly on the shipped example corpus.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "flowbench/io.hpp"
#include "flowbench/manifest.hpp"
#include "flowbench/report.hpp"

using namespace flowbench;

namespace {

std::string fixture(const std::string& rel) {
    return (std::filesystem::path(FLOWBENCH_FIXTURES_DIR) / rel).string();
}

ReportArtifacts build_fixture_report(const std::string& rel) {
    const std::string path = fixture(rel);
    const RunManifest manifest = load_manifest_file(path);
    return build_report(manifest, path, read_file(path));
}

const json& tier1_entry(const json& report, const std::string& needle) {
    for (const auto& entry : report.at("tier1")) {
        if (entry.at("trace").get<std::string>().find(needle) != std::string::npos) return entry;
    }
    FAIL("no tier1 entry matching " + needle);
    throw std::logic_error("unreachable");
}

bool mentions(const json& list, const char* needle) {
    if (!list.is_array()) return false;
    for (const auto& entry : list) {
        if (entry.is_string() &&
            entry.get<std::string>().find(needle) != std::string::npos) {
            return true;
        }
    }
    return false;
}

}  // namespace

TEST_CASE("the example manifest reproduces the reference metrics") {
    const ReportArtifacts artifacts = build_fixture_report("paper.manifest");
    const json& r = artifacts.report;

    REQUIRE(r.at("tier1").size() == 3);

    const json& wse = tier1_entry(r, "wse_tier1");
    CHECK(wse.at("platform") == "wse2");
    CHECK(wse.at("allocation_ratio").at("PE") == 810000.0 / 850000.0);
    CHECK(wse.at("memory_fractions").at("config") == 0.75);
    CHECK(wse.at("memory_fractions").at("training") == 0.2);
    CHECK(wse.at("memory_fractions").at("total") == 0.95);
    CHECK(wse.at("compute_utilization") == 0.57);
    CHECK(wse.at("compute_efficiency") == 430.0 * 1e12 / 1.69e15);
    CHECK(wse.at("roofline").at("regime") == "compute-bound");
    CHECK(wse.at("arithmetic_intensity") == 1086.0997240343247);

    const json& rdu = tier1_entry(r, "rdu_tier1");
    CHECK(rdu.at("weighted_allocation").at("PCU") == 0.575);
    CHECK(rdu.at("weighted_allocation").at("PMU") == 0.675);
    CHECK(rdu.at("weighted_li") == 0.8625);
    // The RDU point is evaluated against its own chip, not the manifest's.
    CHECK(rdu.at("roofline").at("regime") == "memory-bound");

    const json& ipu = tier1_entry(r, "ipu_tier1");
    CHECK(mentions(ipu.at("not_computable"), "global_bw"));
    CHECK(ipu.contains("arithmetic_intensity"));  // workload inherited from manifest
    CHECK_FALSE(ipu.contains("roofline"));

    const json& w = r.at("workload");
    CHECK(w.at("param_count") == 124439808);
    CHECK(w.at("block_param_count") == 7087872);
    CHECK(w.at("training_flops_per_step") == 6116465442816.0);
    CHECK(w.at("activation_bytes") == 5133828096.0);
    CHECK(w.at("weight_traffic_bytes") == 497759232.0);
    CHECK(w.at("arithmetic_intensity") == 1086.0997240343247);

    CHECK(r.at("hardware").at("name") == "wse2");
    CHECK(r.at("hardware").at("ridge_points").at("fp16") == 0.0845);

    const json& t2 = r.at("tier2");
    REQUIRE(t2.at("dp_scaling").size() == 4);
    CHECK(t2.at("dp_scaling")[1].at("speedup") == 1.4848484848484849);
    CHECK(t2.at("dp_scaling")[1].at("efficiency") == 0.7424242424242424);
    CHECK(t2.at("weight_streaming_penalty") == 0.19696969696969702);
    REQUIRE(t2.at("tp_degradation").size() == 2);
    CHECK(t2.at("tp_degradation")[0].at("degradation") == 0.38636363636363635);
    CHECK(t2.at("tp_degradation")[0].at("crosses_machine_boundary") == true);
    CHECK(t2.at("tp_degradation")[1].at("degradation") == 0.02857142857142858);
    CHECK(t2.at("tp_degradation")[1].at("crosses_machine_boundary") == false);
    REQUIRE(t2.at("pp_runs").size() == 8);
    const json& rec = t2.at("pp_recommendation");
    REQUIRE(rec.at("stage_layers").size() == 16);
    std::int64_t rec_total = 0;
    for (const auto& l : rec.at("stage_layers")) rec_total += l.get<std::int64_t>();
    CHECK(rec_total == 48);
    CHECK(t2.at("batch_knee") == 200);
    CHECK(t2.at("batch_knee_theta") == 0.1);
    REQUIRE(t2.at("precision_gains").size() == 3);
    CHECK(t2.at("precision_gains")[0].at("platform") == "bow2000-ipu");
    CHECK(t2.at("precision_gains")[0].at("gain") == 0.22077922077922074);
    CHECK(t2.at("precision_gains")[1].at("platform") == "wse2");
    CHECK(t2.at("precision_gains")[1].at("gain") == 0.10626185958254264);
    CHECK(t2.at("precision_gains")[2].at("platform") == "sn30-rdu");
    CHECK(t2.at("precision_gains")[2].at("gain") == 0.3423137876386688);

    const json& roofline = r.at("roofline");
    CHECK(roofline.at("precision") == "fp16");
    REQUIRE(roofline.at("points").size() == 4);
    CHECK(roofline.at("points")[0].at("label") == "wse_tier1");
    CHECK(roofline.at("points")[1].at("label") == "rdu_tier1");
    CHECK(roofline.at("points")[2].at("label") == "ai=8.9");
    CHECK(roofline.at("points")[3].at("label") == "ai=28.0");
    // The markers sit against the manifest hardware's ceiling.
    CHECK(roofline.at("points")[2].at("regime") == "compute-bound");
    CHECK(roofline.at("points")[3].at("attainable_flops") == 1.69e15);

    REQUIRE(artifacts.roofline_csv.has_value());
    CHECK(artifacts.roofline_csv->rfind("ai,attainable_flops,achieved_flops,regime\n", 0) == 0);
    CHECK(std::count(artifacts.roofline_csv->begin(), artifacts.roofline_csv->end(), '\n') == 5);
    REQUIRE(artifacts.roofline_svg.has_value());
    CHECK(artifacts.roofline_svg->rfind("<svg ", 0) == 0);
    CHECK(artifacts.roofline_svg->find("wse2 roofline (fp16)") != std::string::npos);
}

TEST_CASE("report generation is deterministic") {
    const ReportArtifacts a = build_fixture_report("paper.manifest");
    const ReportArtifacts b = build_fixture_report("paper.manifest");
    CHECK(dump_report(a.report) == dump_report(b.report));
    CHECK(a.markdown == b.markdown);
    REQUIRE(a.roofline_csv.has_value());
    CHECK(*a.roofline_csv == *b.roofline_csv);
    REQUIRE(a.roofline_svg.has_value());
    CHECK(*a.roofline_svg == *b.roofline_svg);
}

TEST_CASE("input digests match independently recomputed hashes") {
    const ReportArtifacts artifacts = build_fixture_report("paper.manifest");
    const json& traces = artifacts.report.at("inputs").at("traces");
    REQUIRE(traces.size() == 31);
    const std::filesystem::path base = fixture("");
    for (const auto& t : traces) {
        const std::string text = read_file((base / t.at("path").get<std::string>()).string());
        CHECK(t.at("fnv1a64") == fnv1a64_hex(text));
        CHECK(t.at("provenance") == "fixture");
    }
    CHECK(artifacts.report.at("inputs").at("manifest").at("fnv1a64") ==
          fnv1a64_hex(read_file(fixture("paper.manifest"))));
}

TEST_CASE("every numeric markdown cell comes verbatim from the report JSON") {
    const ReportArtifacts artifacts = build_fixture_report("paper.manifest");
    const std::string& md = artifacts.markdown;
    const std::string dumped = dump_report(artifacts.report);

    std::size_t checked = 0;
    std::size_t start = 0;
    while (start < md.size()) {
        std::size_t eol = md.find('\n', start);
        if (eol == std::string::npos) eol = md.size();
        const std::string line = md.substr(start, eol - start);
        start = eol + 1;
        if (line.empty() || line[0] != '|') continue;
        std::size_t pos = 1;
        while (pos < line.size()) {
            std::size_t next = line.find('|', pos);
            if (next == std::string::npos) break;
            std::string cell = line.substr(pos, next - pos);
            pos = next + 1;
            const auto trim = [](std::string s) {
                while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
                    s.erase(s.begin());
                }
                while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
                    s.pop_back();
                }
                return s;
            };
            cell = trim(cell);
            if (cell.empty()) continue;
            char* end = nullptr;
            std::strtod(cell.c_str(), &end);
            if (end != cell.c_str() + cell.size()) continue;  // not a pure number
            INFO("cell: " << cell);
            CHECK(dumped.find(cell) != std::string::npos);
            ++checked;
        }
    }
    CHECK(checked > 80);  // the example report is numeric-dense
}

TEST_CASE("markdown sections cover the computed report") {
    const ReportArtifacts artifacts = build_fixture_report("paper.manifest");
    const std::string& md = artifacts.markdown;
    CHECK(md == render_markdown(artifacts.report));
    for (const char* heading :
         {"# flowbench report", "## Inputs", "## Hardware: wse2", "## Workload",
          "## Tier 1 metrics", "## Tier 2 metrics", "### Data-parallel scaling",
          "### Tensor-parallel degradation", "### Pipeline-parallel runs",
          "### Batch-size sweep", "### Precision gains", "## Roofline points (fp16)"}) {
        INFO(heading);
        CHECK(md.find(heading) != std::string::npos);
    }
}

TEST_CASE("the allocation-series manifest yields one entry per trace") {
    const ReportArtifacts artifacts = build_fixture_report("tableI.manifest");
    const json& tier1 = artifacts.report.at("tier1");
    REQUIRE(tier1.size() == 13);
    for (const auto& entry : tier1) {
        const double ratio = entry.at("allocation_ratio").at("PE").get<double>();
        CHECK(ratio > 0.0);
        CHECK(ratio <= 1.0);
    }
    // First of the series: a one-layer model leaves most of the wafer idle.
    CHECK(tier1[0].at("allocation_ratio").at("PE") == 0.33);
}

TEST_CASE("a spec without global bandwidth downgrades the roofline gracefully") {
    RunManifest manifest;
    manifest.hardware_name = "bow2000-ipu";
    TraceRef ref;
    ref.path = "traces/ipu_tier1.jsonl";
    ref.resolved_path = fixture("traces/ipu_tier1.jsonl");
    ref.role = TraceRole::parse("tier1");
    manifest.traces.push_back(ref);

    const ReportArtifacts artifacts = build_report(manifest, "synthetic", "{}");
    CHECK_FALSE(artifacts.roofline_csv.has_value());
    CHECK_FALSE(artifacts.roofline_svg.has_value());
    CHECK_FALSE(artifacts.report.contains("roofline"));
    REQUIRE(artifacts.report.contains("not_computable"));
    CHECK(mentions(artifacts.report.at("not_computable"), "global_bw"));
    // The markdown still renders, with the gap spelled out.
    const std::string& md = artifacts.markdown;
    CHECK(md.find("| global_bw_bytes_per_s | not set |") != std::string::npos);
}

TEST_CASE("report sections honor the options toggles") {
    const std::string path = fixture("paper.manifest");
    const RunManifest manifest = load_manifest_file(path);
    ReportOptions options;
    options.tier2 = false;
    options.roofline = false;
    const ReportArtifacts artifacts = build_report(manifest, path, read_file(path), options);
    CHECK(artifacts.report.contains("tier1"));
    CHECK_FALSE(artifacts.report.contains("tier2"));
    CHECK_FALSE(artifacts.report.contains("roofline"));
    CHECK_FALSE(artifacts.roofline_csv.has_value());
    CHECK_FALSE(artifacts.roofline_svg.has_value());
}
