// SPDX-License-Identifier: Apache-2.0
//
// Static SVG line/scatter plots on log-log axes.
#pragma once

#include <string>
#include <vector>

namespace sgdlab::harness {

struct PlotSeries {
    std::string label;
    std::vector<double> x, y;
    bool markers = false;  // true: points, false: polyline
    std::string color = "#1f77b4";
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    int width = 640;
    int height = 440;
    std::vector<PlotSeries> series;
};

/// Non-positive and non-finite points are dropped. Returns a complete
/// standalone SVG document.
std::string render_loglog(const PlotSpec& spec);

}  // namespace sgdlab::harness
