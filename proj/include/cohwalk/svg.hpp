#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "cohwalk/csv.hpp"

namespace cohwalk::svg {

// Static, self-contained SVG emitters for the two figure styles the CLI
// produces: grouped signed bar charts of mode distributions and the
// coherence-vs-nonclassicality scatter with its identity line.

struct BarSeries {
    std::string label;
    std::string color;
    std::vector<double> values;  // one per position
};

struct BarPanel {
    std::string title;
    std::vector<int> positions;
    std::vector<BarSeries> series;
};

namespace detail {

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline double nice_tick(double span) {
    if (span <= 0.0) return 1.0;
    const double raw = span / 4.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        if (raw <= m * mag) return m * mag;
    }
    return 10.0 * mag;
}

inline void render_panel(std::string& out, const BarPanel& panel,
                         double ox, double oy, double width, double height) {
    const double margin_l = 46, margin_b = 34, margin_t = 24, margin_r = 8;
    const double plot_w = width - margin_l - margin_r;
    const double plot_h = height - margin_t - margin_b;

    double lo = 0.0, hi = 0.0;
    for (const auto& s : panel.series) {
        for (double v : s.values) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (hi == lo) hi = lo + 1.0;
    hi *= 1.08;
    if (lo < 0.0) lo *= 1.08;
    const auto ypix = [&](double v) {
        return oy + margin_t + plot_h * (hi - v) / (hi - lo);
    };

    out += "<g>\n";
    out += "<text x=\"" + num(ox + width / 2) + "\" y=\"" + num(oy + 14)
         + "\" text-anchor=\"middle\" font-size=\"12\" font-weight=\"bold\">"
         + panel.title + "</text>\n";

    // frame and zero line
    out += "<rect x=\"" + num(ox + margin_l) + "\" y=\"" + num(oy + margin_t)
         + "\" width=\"" + num(plot_w) + "\" height=\"" + num(plot_h)
         + "\" fill=\"none\" stroke=\"#444\"/>\n";
    out += "<line x1=\"" + num(ox + margin_l) + "\" y1=\"" + num(ypix(0.0))
         + "\" x2=\"" + num(ox + margin_l + plot_w) + "\" y2=\"" + num(ypix(0.0))
         + "\" stroke=\"#888\" stroke-width=\"0.6\"/>\n";

    // y ticks
    const double tick = nice_tick(hi - lo);
    for (double v = std::ceil(lo / tick) * tick; v <= hi + 1e-12; v += tick) {
        out += "<line x1=\"" + num(ox + margin_l - 3) + "\" y1=\"" + num(ypix(v))
             + "\" x2=\"" + num(ox + margin_l) + "\" y2=\"" + num(ypix(v))
             + "\" stroke=\"#444\"/>\n";
        out += "<text x=\"" + num(ox + margin_l - 6) + "\" y=\"" + num(ypix(v) + 3)
             + "\" text-anchor=\"end\" font-size=\"9\">" + csv::format(std::round(v * 1e9) / 1e9)
             + "</text>\n";
    }

    // bars
    const std::size_t n = panel.positions.size();
    const double slot = plot_w / static_cast<double>(n);
    const double bar_w = std::max(0.8, slot / (panel.series.size() + 1.0));
    for (std::size_t si = 0; si < panel.series.size(); ++si) {
        const auto& s = panel.series[si];
        for (std::size_t k = 0; k < n; ++k) {
            const double v = s.values[k];
            if (v == 0.0) continue;
            const double x = ox + margin_l + slot * k + bar_w * si + (slot - bar_w * panel.series.size()) / 2;
            const double y_top = std::min(ypix(v), ypix(0.0));
            const double h = std::abs(ypix(v) - ypix(0.0));
            out += "<rect x=\"" + num(x) + "\" y=\"" + num(y_top) + "\" width=\"" + num(bar_w)
                 + "\" height=\"" + num(h) + "\" fill=\"" + s.color + "\"/>\n";
        }
    }

    // x labels: at most ~9 of them
    const std::size_t stride = std::max<std::size_t>(1, n / 9);
    for (std::size_t k = 0; k < n; k += stride) {
        const double x = ox + margin_l + slot * (k + 0.5);
        out += "<text x=\"" + num(x) + "\" y=\"" + num(oy + margin_t + plot_h + 12)
             + "\" text-anchor=\"middle\" font-size=\"9\">"
             + std::to_string(panel.positions[k]) + "</text>\n";
    }
    out += "<text x=\"" + num(ox + margin_l + plot_w / 2) + "\" y=\"" + num(oy + height - 6)
         + "\" text-anchor=\"middle\" font-size=\"10\">position</text>\n";
    out += "</g>\n";
}

} // namespace detail

/// One SVG with the given panels side by side; each panel shows grouped bars
/// per position (one bar per series), negative values hanging below zero.
inline std::string bar_panels(const std::vector<BarPanel>& panels) {
    const double pw = 380, ph = 280;
    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\""
                    + std::to_string(static_cast<int>(pw * panels.size()))
                    + "\" height=\"" + std::to_string(static_cast<int>(ph + 20)) + "\">\n"
                      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t i = 0; i < panels.size(); ++i)
        detail::render_panel(out, panels[i], pw * i, 0, pw, ph);
    if (!panels.empty() && panels.front().series.size() == 2) {
        out += "<text x=\"10\" y=\"" + detail::num(ph + 12) + "\" font-size=\"10\">"
               "<tspan fill=\"" + panels.front().series[0].color + "\">&#9632;</tspan> "
             + panels.front().series[0].label
             + "   <tspan fill=\"" + panels.front().series[1].color + "\">&#9632;</tspan> "
             + panels.front().series[1].label + "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

/// Scatter of (x, y) points with the y = x reference line.
inline std::string identity_scatter(const std::string& x_label, const std::string& y_label,
                                    const std::vector<std::pair<double, double>>& points) {
    const double w = 420, h = 420, margin = 52;
    double hi = 1e-9;
    for (const auto& [x, y] : points) hi = std::max({hi, x, y});
    hi *= 1.1;
    const auto px = [&](double v) { return margin + (w - 2 * margin) * v / hi; };
    const auto py = [&](double v) { return h - margin - (h - 2 * margin) * v / hi; };

    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\""
                    + std::to_string(static_cast<int>(w)) + "\" height=\""
                    + std::to_string(static_cast<int>(h)) + "\">\n"
                      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out += "<rect x=\"" + detail::num(margin) + "\" y=\"" + detail::num(margin)
         + "\" width=\"" + detail::num(w - 2 * margin) + "\" height=\"" + detail::num(h - 2 * margin)
         + "\" fill=\"none\" stroke=\"#444\"/>\n";
    out += "<line x1=\"" + detail::num(px(0)) + "\" y1=\"" + detail::num(py(0))
         + "\" x2=\"" + detail::num(px(hi)) + "\" y2=\"" + detail::num(py(hi))
         + "\" stroke=\"black\" stroke-width=\"1\"/>\n";

    const double tick = detail::nice_tick(hi);
    for (double v = 0.0; v <= hi + 1e-12; v += tick) {
        out += "<text x=\"" + detail::num(px(v)) + "\" y=\"" + detail::num(h - margin + 14)
             + "\" text-anchor=\"middle\" font-size=\"9\">" + csv::format(std::round(v * 1e9) / 1e9)
             + "</text>\n";
        out += "<text x=\"" + detail::num(margin - 6) + "\" y=\"" + detail::num(py(v) + 3)
             + "\" text-anchor=\"end\" font-size=\"9\">" + csv::format(std::round(v * 1e9) / 1e9)
             + "</text>\n";
    }
    for (const auto& [x, y] : points) {
        out += "<circle cx=\"" + detail::num(px(x)) + "\" cy=\"" + detail::num(py(y))
             + "\" r=\"4\" fill=\"none\" stroke=\"#c62828\" stroke-width=\"1.5\"/>\n";
    }
    out += "<text x=\"" + detail::num(w / 2) + "\" y=\"" + detail::num(h - 10)
         + "\" text-anchor=\"middle\" font-size=\"11\">" + x_label + "</text>\n";
    out += "<text x=\"14\" y=\"" + detail::num(h / 2)
         + "\" text-anchor=\"middle\" font-size=\"11\" transform=\"rotate(-90 14 "
         + detail::num(h / 2) + ")\">" + y_label + "</text>\n";
    out += "</svg>\n";
    return out;
}

} // namespace cohwalk::svg
