#include "output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <unistd.h>

namespace vx {

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void atomic_write(const std::filesystem::path& path, std::string_view content) {
    const auto tmp = path.string() + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::filesystem::remove(tmp);
            throw IoError("write failed for " + tmp);
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw IoError("cannot rename " + tmp + " to " + path.string() + ": " +
                                 ec.message());
    }
}

namespace {

constexpr double kWidth = 720;
constexpr double kHeight = 420;
constexpr double kLeft = 70;
constexpr double kRight = 20;
constexpr double kTop = 40;
constexpr double kBottom = 50;

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}

std::string tick_label(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Frame {
    double x0, x1, y0, y1;

    double px(double x) const {
        return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight);
    }
    double py(double y) const {
        return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom);
    }
};

void widen(double& lo, double& hi) {
    if (!(hi > lo)) {
        const double pad = std::max(1e-12, std::abs(lo) * 1e-3);
        lo -= pad;
        hi += pad;
    }
}

std::string header(const std::string& title) {
    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) +
                    "\" height=\"" + num(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<text x=\"" + num(kWidth / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" +
         escape(title) + "</text>\n";
    return s;
}

std::string axes(const Frame& f, const std::string& x_label, const std::string& y_label) {
    std::string s;
    const double bx = kLeft, by = kHeight - kBottom;
    s += "<line x1=\"" + num(bx) + "\" y1=\"" + num(by) + "\" x2=\"" + num(kWidth - kRight) +
         "\" y2=\"" + num(by) + "\" stroke=\"black\"/>\n";
    s += "<line x1=\"" + num(bx) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(bx) + "\" y2=\"" +
         num(by) + "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double xv = f.x0 + (f.x1 - f.x0) * i / 5.0;
        const double yv = f.y0 + (f.y1 - f.y0) * i / 5.0;
        s += "<text x=\"" + num(f.px(xv)) + "\" y=\"" + num(by + 16) +
             "\" text-anchor=\"middle\">" + tick_label(xv) + "</text>\n";
        s += "<text x=\"" + num(bx - 6) + "\" y=\"" + num(f.py(yv) + 4) +
             "\" text-anchor=\"end\">" + tick_label(yv) + "</text>\n";
    }
    s += "<text x=\"" + num((kLeft + kWidth - kRight) / 2) + "\" y=\"" + num(kHeight - 12) +
         "\" text-anchor=\"middle\">" + escape(x_label) + "</text>\n";
    if (!y_label.empty()) {
        s += "<text transform=\"translate(16," + num((kTop + by) / 2) +
             ") rotate(-90)\" text-anchor=\"middle\">" + escape(y_label) + "</text>\n";
    }
    return s;
}

std::string legend(const std::vector<std::pair<std::string, std::string>>& entries) {
    std::string s;
    double y = kTop + 6;
    for (const auto& [label, color] : entries) {
        const double x = kWidth - kRight - 140;
        s += "<rect x=\"" + num(x) + "\" y=\"" + num(y - 8) + "\" width=\"12\" height=\"12\" fill=\"" +
             color + "\"/>\n";
        s += "<text x=\"" + num(x + 18) + "\" y=\"" + num(y + 2) + "\">" + escape(label) +
             "</text>\n";
        y += 18;
    }
    return s;
}

}  // namespace

std::string svg_lines(const std::string& title, const std::string& x_label,
                      const std::string& y_label, std::span<const Series> series) {
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series) {
        for (double v : s.x) x0 = std::min(x0, v), x1 = std::max(x1, v);
        for (double v : s.y) y0 = std::min(y0, v), y1 = std::max(y1, v);
    }
    widen(x0, x1);
    widen(y0, y1);
    const Frame f{x0, x1, y0, y1};
    std::string out = header(title) + axes(f, x_label, y_label);
    std::vector<std::pair<std::string, std::string>> keys;
    for (const auto& s : series) {
        out += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.2\" points=\"";
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (i) out += ' ';
            out += num(f.px(s.x[i])) + "," + num(f.py(s.y[i]));
        }
        out += "\"/>\n";
        keys.emplace_back(s.label, s.color);
    }
    out += legend(keys);
    out += "</svg>\n";
    return out;
}

std::string svg_histograms(const std::string& title, const std::string& x_label,
                           std::span<const Bars> bars) {
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y1 = 0.0;
    for (const auto& b : bars) {
        if (b.edges.empty()) continue;
        x0 = std::min(x0, b.edges.front());
        x1 = std::max(x1, b.edges.back());
        for (double d : b.densities) y1 = std::max(y1, d);
    }
    widen(x0, x1);
    if (!(y1 > 0.0)) y1 = 1.0;
    const Frame f{x0, x1, 0.0, y1 * 1.05};
    std::string out = header(title) + axes(f, x_label, "density");
    std::vector<std::pair<std::string, std::string>> keys;
    for (const auto& b : bars) {
        for (std::size_t k = 0; k < b.densities.size(); ++k) {
            const double xa = f.px(b.edges[k]);
            const double xb = f.px(b.edges[k + 1]);
            const double yt = f.py(b.densities[k]);
            out += "<rect x=\"" + num(xa) + "\" y=\"" + num(yt) + "\" width=\"" +
                   num(std::max(0.0, xb - xa)) + "\" height=\"" + num(f.py(0.0) - yt) +
                   "\" fill=\"" + b.color + "\" fill-opacity=\"0.45\" stroke=\"" + b.color +
                   "\" stroke-width=\"0.5\"/>\n";
        }
        keys.emplace_back(b.label, b.color);
    }
    out += legend(keys);
    out += "</svg>\n";
    return out;
}

}  // namespace vx
