// SPDX-FileCopyrightText: © 2026 flowbench contributors
//
// SPDX-License-Identifier: Apache-2.0
//
// flowbench command-line tool: benchmark-analysis reports, roofline plots,
// and mapping simulation for dataflow accelerators.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "flowbench/errors.hpp"
#include "flowbench/hardware.hpp"
#include "flowbench/io.hpp"
#include "flowbench/jsonutil.hpp"
#include "flowbench/manifest.hpp"
#include "flowbench/report.hpp"
#include "flowbench/roofline_plot.hpp"
#include "flowbench/simulator.hpp"
#include "flowbench/tier2.hpp"
#include "flowbench/trace.hpp"
#include "flowbench/version.hpp"

namespace fb = flowbench;
namespace fs = std::filesystem;

namespace {

struct CliOptions {
    std::string manifest_path;
    std::string out_dir = ".";
    std::string spec;  // builtin preset name or spec-file path
    std::string precision;
    double theta = 0.0;  // 0 = use the manifest's value
    std::int64_t seed = 0;
    std::string format = "both";  // json | md | both

    // simulate flags
    std::string mode;  // o0 | o1 | o3
    bool wse = false;
    bool pp = false;
    std::int64_t layers = 12;
    std::int64_t devices = 4;
    std::int64_t budget = 640;
    std::int64_t max_splits = 3;
};

void add_global_flags(CLI::App* cmd, CliOptions& opts) {
    cmd->add_option("--manifest", opts.manifest_path, "Run-manifest file path");
    cmd->add_option("--out", opts.out_dir, "Output directory (default: current directory)");
    cmd->add_option("--spec", opts.spec,
                    "Hardware spec: builtin preset name (wse2, sn30-rdu, bow2000-ipu) or file "
                    "path; overrides the manifest's hardware");
    cmd->add_option("--precision", opts.precision, "Precision label for peak lookup");
    cmd->add_option("--theta", opts.theta, "Batch-knee threshold per doubling");
    cmd->add_option("--seed", opts.seed, "Seed recorded in simulation sidecars");
    cmd->add_option("--format", opts.format, "Report formats to write: json, md or both")
        ->check(CLI::IsMember({"json", "md", "both"}));
}

fb::RunManifest load_and_override(const CliOptions& opts) {
    if (opts.manifest_path.empty()) {
        throw fb::ValidationError("missing --manifest (run-manifest file path)");
    }
    fb::RunManifest manifest = fb::load_manifest_file(opts.manifest_path);
    if (!opts.spec.empty()) {
        manifest.hardware_inline.reset();
        manifest.hardware_name = opts.spec;
    }
    if (opts.theta > 0.0) manifest.options.theta = opts.theta;
    return manifest;
}

void write_report_files(const CliOptions& opts, const fb::ReportArtifacts& artifacts,
                        bool write_report, bool write_plot) {
    const fs::path out(opts.out_dir);
    if (write_report) {
        if (opts.format == "json" || opts.format == "both") {
            fb::atomic_write_file(out / "report.json", fb::dump_report(artifacts.report));
            std::cout << "wrote " << (out / "report.json").string() << "\n";
        }
        if (opts.format == "md" || opts.format == "both") {
            fb::atomic_write_file(out / "report.md", artifacts.markdown);
            std::cout << "wrote " << (out / "report.md").string() << "\n";
        }
    }
    if (write_plot && artifacts.roofline_csv) {
        fb::atomic_write_file(out / "roofline.csv", *artifacts.roofline_csv);
        std::cout << "wrote " << (out / "roofline.csv").string() << "\n";
        fb::atomic_write_file(out / "roofline.svg", *artifacts.roofline_svg);
        std::cout << "wrote " << (out / "roofline.svg").string() << "\n";
    }
}

int run_report_like(const CliOptions& opts, bool tier1, bool tier2, bool roofline,
                    bool require_tier1_traces) {
    const fb::RunManifest manifest = load_and_override(opts);
    if (require_tier1_traces) {
        const bool any = std::any_of(manifest.traces.begin(), manifest.traces.end(),
                                     [](const fb::TraceRef& ref) {
                                         return ref.role.kind == fb::TraceRole::Kind::tier1;
                                     });
        if (!any) {
            throw fb::ValidationError(
                "manifest: empty trace list (tier1 analysis needs at least one trace with role "
                "\"tier1\")");
        }
    }
    fb::ReportOptions report_options;
    report_options.tier1 = tier1;
    report_options.tier2 = tier2;
    report_options.roofline = roofline;
    if (!opts.precision.empty()) report_options.precision = opts.precision;
    const fb::ReportArtifacts artifacts =
        fb::build_report(manifest, opts.manifest_path, fb::read_file(opts.manifest_path),
                         report_options);
    write_report_files(opts, artifacts, /*write_report=*/true, /*write_plot=*/roofline);
    return 0;
}

int run_roofline(const CliOptions& opts) {
    if (!opts.manifest_path.empty()) {
        const fb::RunManifest manifest = load_and_override(opts);
        fb::ReportOptions report_options;
        report_options.tier2 = false;
        if (!opts.precision.empty()) report_options.precision = opts.precision;
        const fb::ReportArtifacts artifacts =
            fb::build_report(manifest, opts.manifest_path, fb::read_file(opts.manifest_path),
                             report_options);
        if (!artifacts.roofline_csv) {
            // The reason is in the report's not_computable list; surface it.
            std::string reason = "roofline not computable";
            if (artifacts.report.contains("not_computable") &&
                !artifacts.report["not_computable"].empty()) {
                reason = artifacts.report["not_computable"][0].get<std::string>();
            }
            throw fb::ValidationError(reason);
        }
        write_report_files(opts, artifacts, /*write_report=*/false, /*write_plot=*/true);
        return 0;
    }
    if (opts.spec.empty()) {
        throw fb::ValidationError("roofline needs --manifest or --spec");
    }
    // Zero workloads: emit the roofline curve alone.
    const fb::HardwareSpec spec = fb::resolve_hardware_spec(opts.spec);
    std::string precision = opts.precision;
    if (precision.empty()) {
        if (spec.peak_flops_per_s.empty()) {
            throw fb::ValidationError("hardware spec " + spec.name + " declares no peak values");
        }
        precision = spec.peak_flops_per_s.begin()->first;
    }
    const std::vector<fb::NamedRooflinePoint> points;  // none: plot rooflines only
    const std::string svg = fb::roofline_svg(spec, precision, points);  // may reject the spec
    const fs::path out(opts.out_dir);
    fb::atomic_write_file(out / "roofline.csv", fb::roofline_points_csv(points));
    std::cout << "wrote " << (out / "roofline.csv").string() << "\n";
    fb::atomic_write_file(out / "roofline.svg", svg);
    std::cout << "wrote " << (out / "roofline.svg").string() << "\n";
    return 0;
}

int run_validate(const CliOptions& opts) {
    fb::json errors = fb::json::array();
    fb::json warnings = fb::json::array();
    const auto record = [&errors](const std::string& where, const fb::Error& e) {
        errors.push_back({{"where", where},
                          {"message", e.what()},
                          {"exit_code", static_cast<int>(e.code())}});
    };

    if (opts.manifest_path.empty()) {
        throw fb::ValidationError("missing --manifest (run-manifest file path)");
    }
    std::optional<fb::RunManifest> manifest;
    try {
        manifest = load_and_override(opts);
    } catch (const fb::Error& e) {
        record(opts.manifest_path, e);
    }
    if (manifest) {
        if (manifest->has_hardware()) {
            try {
                (void)manifest->resolve_hardware();
            } catch (const fb::Error& e) {
                record("hardware", e);
            }
        } else {
            warnings.push_back("manifest declares no hardware; tier1/tier2/roofline need one");
        }
        if (manifest->traces.empty()) {
            warnings.push_back("manifest lists no traces");
        }
        for (const auto& ref : manifest->traces) {
            try {
                const fb::TraceSet trace = fb::parse_trace(fb::read_file(ref.resolved_path),
                                                           ref.path);
                for (const auto& w : trace.warnings) warnings.push_back(ref.path + ": " + w);
            } catch (const fb::Error& e) {
                record(ref.path, e);
            }
        }
    }

    fb::json result;
    result["status"] = errors.empty() ? "ok" : "error";
    result["errors"] = errors;
    result["warnings"] = warnings;
    std::cout << result.dump(2) << "\n";
    return errors.empty() ? 0 : static_cast<int>(fb::ExitCode::validation);
}

int run_simulate(const CliOptions& opts) {
    const int strategies = (opts.mode.empty() ? 0 : 1) + (opts.wse ? 1 : 0) + (opts.pp ? 1 : 0);
    if (strategies != 1) {
        throw fb::ValidationError(
            "simulate: choose exactly one strategy: --mode o0|o1|o3, --wse, or --pp");
    }
    const fs::path out(opts.out_dir);
    fb::TraceSet trace;
    fb::json plan_doc;

    if (!opts.mode.empty()) {
        fb::ModelConfig cfg;  // gpt2-style defaults; layer count from the flag
        cfg.num_layers = opts.layers;
        const fb::DecoderGraph graph = fb::build_decoder_graph(cfg);
        fb::PartitionOptions options;
        options.budget = opts.budget;
        options.max_splits_per_decoder = opts.max_splits;
        const fb::SectionPlan plan =
            fb::partition_sections(graph, fb::compile_mode_from_string(opts.mode), options);
        trace = fb::synthesize_trace(plan, "sn30-rdu");
        plan_doc = fb::plan_to_json(plan);
    } else if (opts.wse) {
        const fb::HardwareSpec spec =
            fb::resolve_hardware_spec(opts.spec.empty() ? "wse2" : opts.spec);
        const fb::PlacementPlan plan = fb::wse_place(opts.layers, spec);
        trace = fb::synthesize_trace(plan, spec.name);
        plan_doc = fb::plan_to_json(plan);
    } else {
        const fb::HardwareSpec spec =
            fb::resolve_hardware_spec(opts.spec.empty() ? "bow2000-ipu" : opts.spec);
        const fb::PipelinePlan plan = fb::pp_assign(opts.layers, opts.devices);
        trace = fb::synthesize_trace(plan, spec.name, spec);
        plan_doc = fb::plan_to_json(plan);
    }

    plan_doc["seed"] = opts.seed;
    fb::atomic_write_file(out / "trace.jsonl", fb::emit_trace(trace));
    std::cout << "wrote " << (out / "trace.jsonl").string() << "\n";
    fb::atomic_write_file(out / "plan.json", plan_doc.dump(2) + "\n");
    std::cout << "wrote " << (out / "plan.json").string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string(fb::kToolName) +
                 " — benchmark analysis for dataflow accelerators"};
    app.set_version_flag("--version", std::string(fb::kToolVersion));
    app.require_subcommand(1);

    CliOptions opts;
    CLI::App* cmd_tier1 = app.add_subcommand("tier1", "Per-trace resource metrics report");
    CLI::App* cmd_tier2 = app.add_subcommand("tier2", "Scalability and optimization report");
    CLI::App* cmd_roofline = app.add_subcommand("roofline", "Roofline points file and plot");
    CLI::App* cmd_simulate = app.add_subcommand("simulate", "Synthesize mapping plans and traces");
    CLI::App* cmd_validate = app.add_subcommand("validate", "Validate manifest and trace files");
    CLI::App* cmd_report = app.add_subcommand("report", "All-in-one report and plot");
    for (CLI::App* cmd :
         {cmd_tier1, cmd_tier2, cmd_roofline, cmd_simulate, cmd_validate, cmd_report}) {
        add_global_flags(cmd, opts);
    }
    cmd_simulate->add_option("--mode", opts.mode, "Section partitioning mode: o0, o1 or o3");
    cmd_simulate->add_flag("--wse", opts.wse, "Whole-graph PE placement strategy");
    cmd_simulate->add_flag("--pp", opts.pp, "Pipeline-parallel layer assignment strategy");
    cmd_simulate->add_option("--layers", opts.layers, "Decoder layer count");
    cmd_simulate->add_option("--devices", opts.devices, "Pipeline device count");
    cmd_simulate->add_option("--budget", opts.budget, "Section resource budget (o3)");
    cmd_simulate->add_option("--max-splits", opts.max_splits,
                             "Maximum op-chunks per decoder (o3)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        // Flag misuse is a validation failure; help/version exit cleanly.
        return rc == 0 ? 0 : static_cast<int>(fb::ExitCode::validation);
    }

    try {
        if (cmd_tier1->parsed()) {
            return run_report_like(opts, true, false, false, /*require_tier1_traces=*/true);
        }
        if (cmd_tier2->parsed()) {
            return run_report_like(opts, false, true, false, /*require_tier1_traces=*/false);
        }
        if (cmd_report->parsed()) {
            return run_report_like(opts, true, true, true, /*require_tier1_traces=*/false);
        }
        if (cmd_roofline->parsed()) return run_roofline(opts);
        if (cmd_validate->parsed()) return run_validate(opts);
        if (cmd_simulate->parsed()) return run_simulate(opts);
        throw fb::InternalError("no subcommand dispatched");
    } catch (const fb::Error& e) {
        std::cerr << "flowbench: error: " << e.what() << "\n";
        fb::json failure;
        failure["status"] = "error";
        failure["errors"] = fb::json::array(
            {{{"message", e.what()}, {"exit_code", static_cast<int>(e.code())}}});
        std::cout << failure.dump(2) << "\n";
        return static_cast<int>(e.code());
    } catch (const std::exception& e) {
        std::cerr << "flowbench: internal error: " << e.what() << "\n";
        return static_cast<int>(fb::ExitCode::internal);
    }
}
