// SPDX-License-Identifier: Apache-2.0
#include "sgdlab/harness/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sgdlab/harness/csv.hpp"

namespace sgdlab::harness {

namespace {

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string fmt(double v) {
    // Two decimals keep files small and stable.
    return format_double(std::round(v * 100.0) / 100.0);
}

}  // namespace

std::string render_loglog(const PlotSpec& spec) {
    constexpr double kLeft = 70, kRight = 150, kTop = 40, kBottom = 50;
    const double w = spec.width, h = spec.height;
    const double pw = w - kLeft - kRight, ph = h - kTop - kBottom;

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : spec.series)
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!(s.x[i] > 0 && s.y[i] > 0) || !std::isfinite(s.x[i]) || !std::isfinite(s.y[i]))
                continue;
            xmin = std::min(xmin, std::log10(s.x[i]));
            xmax = std::max(xmax, std::log10(s.x[i]));
            ymin = std::min(ymin, std::log10(s.y[i]));
            ymax = std::max(ymax, std::log10(s.y[i]));
        }
    if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    xmin = std::floor(xmin), xmax = std::max(std::ceil(xmax), xmin + 1);
    ymin = std::floor(ymin), ymax = std::max(std::ceil(ymax), ymin + 1);

    auto px = [&](double lx) { return kLeft + (lx - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double ly) { return kTop + (ymax - ly) / (ymax - ymin) * ph; };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\""
      << spec.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << fmt(kLeft + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << escape(spec.title) << "</text>\n";

    for (double d = xmin; d <= xmax + 1e-9; d += 1.0) {
        o << "<line x1=\"" << fmt(px(d)) << "\" y1=\"" << fmt(kTop) << "\" x2=\"" << fmt(px(d))
          << "\" y2=\"" << fmt(kTop + ph) << "\" stroke=\"#ddd\"/>\n";
        o << "<text x=\"" << fmt(px(d)) << "\" y=\"" << fmt(kTop + ph + 16)
          << "\" text-anchor=\"middle\">1e" << static_cast<int>(d) << "</text>\n";
    }
    for (double d = ymin; d <= ymax + 1e-9; d += 1.0) {
        o << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(py(d)) << "\" x2=\"" << fmt(kLeft + pw)
          << "\" y2=\"" << fmt(py(d)) << "\" stroke=\"#ddd\"/>\n";
        o << "<text x=\"" << fmt(kLeft - 6) << "\" y=\"" << fmt(py(d) + 4)
          << "\" text-anchor=\"end\">1e" << static_cast<int>(d) << "</text>\n";
    }
    o << "<rect x=\"" << fmt(kLeft) << "\" y=\"" << fmt(kTop) << "\" width=\"" << fmt(pw)
      << "\" height=\"" << fmt(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
    o << "<text x=\"" << fmt(kLeft + pw / 2) << "\" y=\"" << fmt(h - 12)
      << "\" text-anchor=\"middle\">" << escape(spec.x_label) << "</text>\n";
    o << "<text transform=\"translate(16," << fmt(kTop + ph / 2)
      << ") rotate(-90)\" text-anchor=\"middle\">" << escape(spec.y_label) << "</text>\n";

    double legend_y = kTop + 10;
    for (const auto& s : spec.series) {
        std::ostringstream pts;
        std::size_t count = 0;
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!(s.x[i] > 0 && s.y[i] > 0) || !std::isfinite(s.x[i]) || !std::isfinite(s.y[i]))
                continue;
            const double X = px(std::log10(s.x[i])), Y = py(std::log10(s.y[i]));
            if (s.markers)
                o << "<circle cx=\"" << fmt(X) << "\" cy=\"" << fmt(Y) << "\" r=\"3\" fill=\""
                  << s.color << "\"/>\n";
            else
                pts << (count ? " " : "") << fmt(X) << ',' << fmt(Y);
            ++count;
        }
        if (!s.markers && count > 1)
            o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.2\" points=\""
              << pts.str() << "\"/>\n";
        if (!s.label.empty()) {
            o << "<rect x=\"" << fmt(kLeft + pw + 10) << "\" y=\"" << fmt(legend_y - 8)
              << "\" width=\"10\" height=\"10\" fill=\"" << s.color << "\"/>\n";
            o << "<text x=\"" << fmt(kLeft + pw + 24) << "\" y=\"" << fmt(legend_y + 1) << "\">"
              << escape(s.label) << "</text>\n";
            legend_y += 16;
        }
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace sgdlab::harness
