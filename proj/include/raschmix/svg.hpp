#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "sim.hpp"

namespace raschmix {

// Minimal dependency-free SVG line chart of study results: detection rate
// (share of replications with more than one latent class) against the
// swept parameter, one series per scenario cell group.

namespace detail {

inline std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

}  // namespace detail

inline std::string render_study_svg(const std::vector<StudyCell>& cells) {
    if (cells.empty()) throw std::invalid_argument("render_study_svg: no cells");

    std::set<double> deltas, thetas;
    for (const StudyCell& c : cells) {
        deltas.insert(c.delta);
        thetas.insert(c.theta);
    }
    // sweep over whichever parameter actually varies (delta by default)
    const bool sweep_delta = deltas.size() > 1 || thetas.size() <= 1;
    const std::string x_name = sweep_delta ? "delta" : "theta";

    // series key: scenario plus the non-swept parameter value
    std::map<std::pair<int, double>, std::vector<std::pair<double, double>>> series;
    for (const StudyCell& c : cells) {
        if (c.missing) continue;
        const double x = sweep_delta ? c.delta : c.theta;
        const double other = sweep_delta ? c.theta : c.delta;
        series[{c.scenario_id, other}].emplace_back(x, c.rate_flagged);
    }
    if (series.empty()) throw std::invalid_argument("render_study_svg: every cell is missing");
    for (auto& [key, pts] : series) std::sort(pts.begin(), pts.end());

    double x_min = sweep_delta ? *deltas.begin() : *thetas.begin();
    double x_max = sweep_delta ? *deltas.rbegin() : *thetas.rbegin();
    if (x_max <= x_min) {
        x_min -= 0.5;
        x_max += 0.5;
    }

    const double width = 640, height = 420;
    const double left = 60, right = 170, top = 30, bottom = 50;
    const double plot_w = width - left - right, plot_h = height - top - bottom;
    const auto px = [&](double x) { return left + (x - x_min) / (x_max - x_min) * plot_w; };
    const auto py = [&](double y) { return top + (1.0 - y) * plot_h; };

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#9467bd", "#ff7f0e", "#8c564b"};

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::svg_num(width) +
           "\" height=\"" + detail::svg_num(height) + "\" viewBox=\"0 0 " +
           detail::svg_num(width) + " " + detail::svg_num(height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // axes
    svg += "<line x1=\"" + detail::svg_num(left) + "\" y1=\"" + detail::svg_num(py(0)) +
           "\" x2=\"" + detail::svg_num(left + plot_w) + "\" y2=\"" + detail::svg_num(py(0)) +
           "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + detail::svg_num(left) + "\" y1=\"" + detail::svg_num(py(0)) +
           "\" x2=\"" + detail::svg_num(left) + "\" y2=\"" + detail::svg_num(py(1)) +
           "\" stroke=\"black\"/>\n";

    // y ticks at 0, .25, .5, .75, 1
    for (int t = 0; t <= 4; ++t) {
        const double y = t / 4.0;
        svg += "<line x1=\"" + detail::svg_num(left - 4) + "\" y1=\"" + detail::svg_num(py(y)) +
               "\" x2=\"" + detail::svg_num(left) + "\" y2=\"" + detail::svg_num(py(y)) +
               "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + detail::svg_num(left - 8) + "\" y=\"" +
               detail::svg_num(py(y) + 4) +
               "\" font-size=\"12\" text-anchor=\"end\" font-family=\"sans-serif\">" +
               detail::svg_num(y) + "</text>\n";
        if (t > 0)
            svg += "<line x1=\"" + detail::svg_num(left) + "\" y1=\"" + detail::svg_num(py(y)) +
                   "\" x2=\"" + detail::svg_num(left + plot_w) + "\" y2=\"" +
                   detail::svg_num(py(y)) + "\" stroke=\"#dddddd\" stroke-dasharray=\"3,3\"/>\n";
    }

    // x ticks at every swept value
    const std::set<double>& xs = sweep_delta ? deltas : thetas;
    for (double x : xs) {
        svg += "<line x1=\"" + detail::svg_num(px(x)) + "\" y1=\"" + detail::svg_num(py(0)) +
               "\" x2=\"" + detail::svg_num(px(x)) + "\" y2=\"" + detail::svg_num(py(0) + 4) +
               "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + detail::svg_num(px(x)) + "\" y=\"" + detail::svg_num(py(0) + 18) +
               "\" font-size=\"12\" text-anchor=\"middle\" font-family=\"sans-serif\">" +
               detail::format_double(x) + "</text>\n";
    }

    // axis labels
    svg += "<text x=\"" + detail::svg_num(left + plot_w / 2) + "\" y=\"" +
           detail::svg_num(height - 12) +
           "\" font-size=\"13\" text-anchor=\"middle\" font-family=\"sans-serif\">" + x_name +
           "</text>\n";
    svg += "<text x=\"16\" y=\"" + detail::svg_num(top + plot_h / 2) +
           "\" font-size=\"13\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "transform=\"rotate(-90 16 " +
           detail::svg_num(top + plot_h / 2) + ")\">rate of K&gt;1</text>\n";

    // series
    int idx = 0;
    for (const auto& [key, pts] : series) {
        const char* color = palette[idx % 6];
        std::string points;
        for (const auto& [x, y] : pts) {
            if (!points.empty()) points += ' ';
            points += detail::svg_num(px(x)) + "," + detail::svg_num(py(y));
        }
        if (pts.size() > 1)
            svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
                   "\" stroke-width=\"2\" points=\"" + points + "\"/>\n";
        for (const auto& [x, y] : pts)
            svg += "<circle cx=\"" + detail::svg_num(px(x)) + "\" cy=\"" + detail::svg_num(py(y)) +
                   "\" r=\"3.5\" fill=\"" + std::string(color) + "\"/>\n";

        // legend
        const double ly = top + 10 + 20.0 * idx;
        const double lx = left + plot_w + 14;
        std::string label = "scenario " + std::to_string(key.first);
        label += (sweep_delta ? ", theta=" : ", delta=") + detail::format_double(key.second);
        svg += "<line x1=\"" + detail::svg_num(lx) + "\" y1=\"" + detail::svg_num(ly) +
               "\" x2=\"" + detail::svg_num(lx + 18) + "\" y2=\"" + detail::svg_num(ly) +
               "\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"" + detail::svg_num(lx + 24) + "\" y=\"" + detail::svg_num(ly + 4) +
               "\" font-size=\"12\" font-family=\"sans-serif\">" + label + "</text>\n";
        ++idx;
    }

    svg += "</svg>\n";
    return svg;
}

}  // namespace raschmix
