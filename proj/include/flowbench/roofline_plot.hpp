// SPDX-FileCopyrightText: © 2026 flowbench contributors
//
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "flowbench/errors.hpp"
#include "flowbench/hardware.hpp"
#include "flowbench/jsonutil.hpp"

namespace flowbench {

struct NamedRooflinePoint {
    std::string label;
    RooflinePoint point;
};

/// Comma-separated points file: ai, attainable, achieved (empty when
/// unknown), regime. Numbers use shortest round-trip formatting.
inline std::string roofline_points_csv(const std::vector<NamedRooflinePoint>& points) {
    std::string out = "ai,attainable_flops,achieved_flops,regime\n";
    for (const auto& p : points) {
        out += json(p.point.ai).dump();
        out += ',';
        out += json(p.point.attainable_flops).dump();
        out += ',';
        if (p.point.achieved_flops) out += json(*p.point.achieved_flops).dump();
        out += ',';
        out += to_string(p.point.regime);
        out += '\n';
    }
    return out;
}

namespace detail {

inline std::string fixed2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

inline std::string decade_label(int exponent) {
    return "1e" + std::to_string(exponent);
}

}  // namespace detail

/// Standalone SVG roofline chart, 800x600 logical units, log-log axes, the
/// bandwidth slope, the peak ceiling, and one marker per workload point.
/// Output is byte-deterministic for identical inputs.
inline std::string roofline_svg(const HardwareSpec& spec, const std::string& precision,
                                const std::vector<NamedRooflinePoint>& points) {
    const double peak = spec.peak_for(precision);
    const double bw = spec.global_bw_or_throw();
    const double ridge = peak / bw;

    // Decade ranges. X covers the ridge and every positive AI with one decade
    // of margin; Y is anchored one decade above the peak and spans six.
    double ai_lo = ridge;
    double ai_hi = ridge;
    for (const auto& p : points) {
        if (p.point.ai > 0.0) {
            ai_lo = std::min(ai_lo, p.point.ai);
            ai_hi = std::max(ai_hi, p.point.ai);
        }
    }
    const int x_lo = static_cast<int>(std::floor(std::log10(ai_lo))) - 1;
    const int x_hi = static_cast<int>(std::ceil(std::log10(ai_hi))) + 1;
    const int y_hi = static_cast<int>(std::ceil(std::log10(peak * 2.0)));
    const int y_lo = y_hi - 6;

    const double width = 800.0;
    const double height = 600.0;
    const double ml = 80.0, mr = 30.0, mt = 40.0, mb = 60.0;
    const double pw = width - ml - mr;
    const double ph = height - mt - mb;
    const auto x_of = [&](double v) {
        const double lv = std::log10(std::max(v, std::pow(10.0, x_lo)));
        const double clamped = std::min(lv, static_cast<double>(x_hi));
        return ml + (clamped - x_lo) / static_cast<double>(x_hi - x_lo) * pw;
    };
    const auto y_of = [&](double v) {
        const double lv = std::log10(std::max(v, std::pow(10.0, y_lo)));
        const double clamped = std::min(lv, static_cast<double>(y_hi));
        return mt + (y_hi - clamped) / static_cast<double>(y_hi - y_lo) * ph;
    };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" "
           "viewBox=\"0 0 800 600\">\n";
    svg += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"#ffffff\"/>\n";
    svg += "<text x=\"400\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"16\">" +
           spec.name + " roofline (" + precision + ")</text>\n";

    // Grid and tick labels, one per decade.
    for (int e = x_lo; e <= x_hi; ++e) {
        const std::string x = detail::fixed2(x_of(std::pow(10.0, e)));
        svg += "<line x1=\"" + x + "\" y1=\"" + detail::fixed2(mt) + "\" x2=\"" + x + "\" y2=\"" +
               detail::fixed2(mt + ph) + "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        svg += "<text x=\"" + x + "\" y=\"" + detail::fixed2(mt + ph + 18.0) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
               detail::decade_label(e) + "</text>\n";
    }
    for (int e = y_lo; e <= y_hi; ++e) {
        const std::string y = detail::fixed2(y_of(std::pow(10.0, e)));
        svg += "<line x1=\"" + detail::fixed2(ml) + "\" y1=\"" + y + "\" x2=\"" +
               detail::fixed2(ml + pw) + "\" y2=\"" + y +
               "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        svg += "<text x=\"" + detail::fixed2(ml - 8.0) + "\" y=\"" + y +
               "\" text-anchor=\"end\" dominant-baseline=\"middle\" "
               "font-family=\"sans-serif\" font-size=\"11\">" +
               detail::decade_label(e) + "</text>\n";
    }
    svg += "<text x=\"" + detail::fixed2(ml + pw / 2.0) + "\" y=\"" +
           detail::fixed2(height - 14.0) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
           "Arithmetic intensity (FLOPs/byte)</text>\n";
    svg += "<text x=\"20\" y=\"" + detail::fixed2(mt + ph / 2.0) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
           "transform=\"rotate(-90 20 " +
           detail::fixed2(mt + ph / 2.0) + ")\">Performance (FLOP/s)</text>\n";

    // Roofline: bandwidth slope up to the ridge, peak ceiling beyond it.
    const double x_left = std::pow(10.0, x_lo);
    const double x_right = std::pow(10.0, x_hi);
    const double ridge_clamped = std::clamp(ridge, x_left, x_right);
    svg += "<polyline fill=\"none\" stroke=\"#333333\" stroke-width=\"2\" points=\"";
    svg += detail::fixed2(x_of(x_left)) + "," + detail::fixed2(y_of(std::min(bw * x_left, peak)));
    svg += " " + detail::fixed2(x_of(ridge_clamped)) + "," +
           detail::fixed2(y_of(std::min(bw * ridge_clamped, peak)));
    svg += " " + detail::fixed2(x_of(x_right)) + "," + detail::fixed2(y_of(peak));
    svg += "\"/>\n";

    // Workload markers: circle at the attainable value, open square at the
    // achieved value when present.
    for (const auto& p : points) {
        const std::string color =
            p.point.regime == RooflineRegime::compute_bound ? "#d62728" : "#1f77b4";
        const std::string cx = detail::fixed2(x_of(p.point.ai));
        svg += "<circle cx=\"" + cx + "\" cy=\"" + detail::fixed2(y_of(p.point.attainable_flops)) +
               "\" r=\"5\" fill=\"" + color + "\"/>\n";
        if (p.point.achieved_flops) {
            const std::string cy = detail::fixed2(y_of(*p.point.achieved_flops));
            svg += "<rect x=\"" + detail::fixed2(x_of(p.point.ai) - 4.0) + "\" y=\"" +
                   detail::fixed2(y_of(*p.point.achieved_flops) - 4.0) +
                   "\" width=\"8\" height=\"8\" fill=\"none\" stroke=\"" + color +
                   "\" stroke-width=\"1.5\"/>\n";
        }
        if (!p.label.empty()) {
            svg += "<text x=\"" + detail::fixed2(x_of(p.point.ai) + 8.0) + "\" y=\"" +
                   detail::fixed2(y_of(p.point.attainable_flops) - 8.0) +
                   "\" font-family=\"sans-serif\" font-size=\"10\">" + p.label + "</text>\n";
        }
    }

    // Legend.
    svg += "<circle cx=\"" + detail::fixed2(ml + pw - 150.0) + "\" cy=\"" +
           detail::fixed2(mt + 16.0) + "\" r=\"5\" fill=\"#d62728\"/>\n";
    svg += "<text x=\"" + detail::fixed2(ml + pw - 140.0) + "\" y=\"" +
           detail::fixed2(mt + 20.0) +
           "\" font-family=\"sans-serif\" font-size=\"11\">compute-bound</text>\n";
    svg += "<circle cx=\"" + detail::fixed2(ml + pw - 150.0) + "\" cy=\"" +
           detail::fixed2(mt + 34.0) + "\" r=\"5\" fill=\"#1f77b4\"/>\n";
    svg += "<text x=\"" + detail::fixed2(ml + pw - 140.0) + "\" y=\"" +
           detail::fixed2(mt + 38.0) +
           "\" font-family=\"sans-serif\" font-size=\"11\">memory-bound</text>\n";
    svg += "</svg>\n";
    return svg;
}

}  // namespace flowbench
