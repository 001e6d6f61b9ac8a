#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vx {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// %.17g, enough to round-trip any double.
std::string fmt17(double x);

// Writes to a sibling temp file and renames it over `path`.
void atomic_write(const std::filesystem::path& path, std::string_view content);

struct Series {
    std::string label;
    std::string color;
    std::vector<double> x;
    std::vector<double> y;
};

// Polyline chart of one or more series sharing the axes.
std::string svg_lines(const std::string& title, const std::string& x_label,
                      const std::string& y_label, std::span<const Series> series);

struct Bars {
    std::string label;
    std::string color;
    std::vector<double> edges;      // bins + 1
    std::vector<double> densities;  // bins
};

// Overlaid step histograms with translucent fills.
std::string svg_histograms(const std::string& title, const std::string& x_label,
                           std::span<const Bars> bars);

}  // namespace vx
