#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "cubicmf/transitions.hpp"

namespace cubicmf {

namespace detail {

inline std::string px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string gtext(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

// Diverging map, blue (-1) -> gray (0) -> red (+1), linear in each half.
inline std::array<int, 3> diverging_color(double m) {
    constexpr std::array<int, 3> blue{58, 76, 192}, gray{221, 221, 221},
        red{180, 4, 38};
    const double t = std::clamp(m, -1.0, 1.0);
    const auto& a = t < 0.0 ? blue : gray;
    const auto& b = t < 0.0 ? gray : red;
    const double u = t < 0.0 ? t + 1.0 : t;
    std::array<int, 3> c{};
    for (int i = 0; i < 3; ++i)
        c[i] = static_cast<int>(std::lround(a[i] + (b[i] - a[i]) * u));
    return c;
}

}  // namespace detail

/// Deterministic SVG heatmap of a phase diagram: one rect per grid cell
/// colored by the order parameter, labeled axes, and the refined transition
/// points overlaid as black polylines (chained across adjacent rows).
inline std::string render_heatmap_svg(const PhaseDiagramResult& d,
                                      const std::string& x_label,
                                      const std::string& y_label) {
    constexpr double ml = 70, mr = 20, mt = 20, mb = 50;
    constexpr double pw = 560, ph = 420;
    const double width = ml + pw + mr, height = mt + ph + mb;

    const double x_min = d.at(0, 0).x, x_max = d.at(d.nx - 1, 0).x;
    const double y_min = d.at(0, 0).y, y_max = d.at(0, d.ny - 1).y;
    const double step_x = (x_max - x_min) / (d.nx - 1);
    const double step_y = (y_max - y_min) / (d.ny - 1);
    // data -> pixel; cells are step-sized boxes centered on grid points,
    // SVG y runs downward
    const auto to_px = [&](double x) {
        return ml + (x - x_min + step_x / 2) / (x_max - x_min + step_x) * pw;
    };
    const auto to_py = [&](double y) {
        return mt + ph - (y - y_min + step_y / 2) / (y_max - y_min + step_y) * ph;
    };
    const double cell_w = pw / d.nx, cell_h = ph / d.ny;

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::px(width) +
           "\" height=\"" + detail::px(height) + "\" viewBox=\"0 0 " +
           detail::px(width) + " " + detail::px(height) + "\">\n";
    for (int iy = 0; iy < d.ny; ++iy) {
        for (int ix = 0; ix < d.nx; ++ix) {
            const auto& cell = d.at(ix, iy);
            std::string fill = "rgb(255,255,255)";
            if (cell.valid) {
                const auto c = detail::diverging_color(cell.m_total);
                fill = "rgb(" + std::to_string(c[0]) + "," + std::to_string(c[1]) +
                       "," + std::to_string(c[2]) + ")";
            }
            svg += "<rect x=\"" + detail::px(to_px(cell.x) - cell_w / 2) + "\" y=\"" +
                   detail::px(to_py(cell.y) - cell_h / 2) + "\" width=\"" +
                   detail::px(cell_w) + "\" height=\"" + detail::px(cell_h) +
                   "\" fill=\"" + fill + "\"/>\n";
        }
    }

    // Chain refined transition points into polylines: a point extends the
    // nearest chain whose last point sits on the adjacent grid row; each
    // chain takes at most one point per row, the rest start new chains.
    struct Chain {
        std::vector<std::pair<double, double>> pts;
        bool claimed = false;
    };
    std::vector<Chain> chains;
    std::vector<std::size_t> open;
    for (std::size_t i = 0; i < d.transitions.size();) {
        const double y = d.transitions[i].y;
        std::size_t j = i;
        while (j < d.transitions.size() && d.transitions[j].y == y) ++j;
        for (std::size_t idx : open) chains[idx].claimed = false;
        std::vector<std::size_t> extended;
        for (std::size_t k = i; k < j; ++k) {
            const double x = d.transitions[k].event.location;
            std::size_t best = chains.size();
            double best_dx = std::numeric_limits<double>::infinity();
            for (std::size_t idx : open) {
                if (chains[idx].claimed) continue;
                if (y - chains[idx].pts.back().second > 1.5 * step_y) continue;
                const double dx = std::fabs(chains[idx].pts.back().first - x);
                if (dx < best_dx) {
                    best_dx = dx;
                    best = idx;
                }
            }
            if (best == chains.size()) chains.push_back({});
            chains[best].pts.push_back({x, y});
            chains[best].claimed = true;
            extended.push_back(best);
        }
        open = extended;
        i = j;
    }
    for (const auto& c : chains) {
        const auto& chain = c.pts;
        if (chain.size() < 2) {
            const auto& p = chain.front();
            svg += "<line x1=\"" + detail::px(to_px(p.first)) + "\" y1=\"" +
                   detail::px(to_py(p.second) - cell_h / 2) + "\" x2=\"" +
                   detail::px(to_px(p.first)) + "\" y2=\"" +
                   detail::px(to_py(p.second) + cell_h / 2) +
                   "\" stroke=\"black\" stroke-width=\"2\"/>\n";
            continue;
        }
        svg += "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < chain.size(); ++i) {
            if (i) svg += ' ';
            svg += detail::px(to_px(chain[i].first)) + "," + detail::px(to_py(chain[i].second));
        }
        svg += "\"/>\n";
    }

    svg += "<rect x=\"" + detail::px(ml) + "\" y=\"" + detail::px(mt) + "\" width=\"" +
           detail::px(pw) + "\" height=\"" + detail::px(ph) +
           "\" fill=\"none\" stroke=\"black\"/>\n";
    const auto text = [&](double x, double y, const std::string& s,
                          const std::string& extra) {
        return "<text x=\"" + detail::px(x) + "\" y=\"" + detail::px(y) +
               "\" font-family=\"sans-serif\" font-size=\"13\"" + extra + ">" + s +
               "</text>\n";
    };
    svg += text(ml + pw / 2, mt + ph + 35, x_label, " text-anchor=\"middle\"");
    svg += "<text x=\"18\" y=\"" + detail::px(mt + ph / 2) +
           "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
           detail::px(mt + ph / 2) + ")\">" + y_label + "</text>\n";
    svg += text(ml, mt + ph + 16, detail::gtext(x_min), " text-anchor=\"middle\"");
    svg += text(ml + pw, mt + ph + 16, detail::gtext(x_max), " text-anchor=\"middle\"");
    svg += text(ml - 6, mt + ph, detail::gtext(y_min), " text-anchor=\"end\"");
    svg += text(ml - 6, mt + 10, detail::gtext(y_max), " text-anchor=\"end\"");
    svg += "</svg>\n";
    return svg;
}

}  // namespace cubicmf
