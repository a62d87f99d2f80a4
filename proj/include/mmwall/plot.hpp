#pragma once

// Minimal line-plot SVG writer. Output depends only on the data, so plots are
// byte-stable across runs.

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mmwall {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct Plot {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<PlotSeries> series;
    std::optional<std::pair<double, double>> x_range;
    std::optional<std::pair<double, double>> y_range;  // values outside are clamped
};

/// `comment` is emitted as an XML comment ahead of the root element.
void write_svg(std::ostream& os, const Plot& plot, const std::string& comment = {});

}  // namespace mmwall
