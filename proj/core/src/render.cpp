#include "metadesign/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "metadesign/error.hpp"

namespace metadesign {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

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

std::string svg_open(double w, double h) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "\" height=\"" + num(h) +
           "\" viewBox=\"0 0 " + num(w) + " " + num(h) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
}

// Solid runs per row, drawn as rectangles.
std::string cell_rects(const Microstructure& m, double x0, double y0, double scale) {
    std::string out;
    for (int r = 0; r < m.height(); ++r) {
        int c = 0;
        while (c < m.width()) {
            if (!m(r, c)) {
                ++c;
                continue;
            }
            int e = c;
            while (e < m.width() && m(r, e)) ++e;
            out += "<rect x=\"" + num(x0 + c * scale) + "\" y=\"" + num(y0 + r * scale) + "\" width=\"" +
                   num((e - c) * scale) + "\" height=\"" + num(scale) + "\" fill=\"#000000\"/>\n";
            c = e;
        }
    }
    return out;
}

std::pair<double, double> finite_range(const std::vector<double>& v) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double x : v)
        if (std::isfinite(x)) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
    if (!(lo <= hi)) return {0.0, 1.0};
    if (hi - lo < 1e-300) return {lo - 0.5, hi + 0.5};
    return {lo, hi};
}

}  // namespace

void write_text(const std::string& text, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    if (!out) throw Error("write failed for " + path.string());
}

void write_pbm(const Microstructure& m, const std::filesystem::path& path) {
    std::string s = "P1\n" + std::to_string(m.width()) + " " + std::to_string(m.height()) + "\n";
    for (int r = 0; r < m.height(); ++r) {
        for (int c = 0; c < m.width(); ++c) s += m(r, c) ? '1' : '0';
        s += '\n';
    }
    write_text(s, path);
}

void write_pgm(const DensityField& f, const std::filesystem::path& path) {
    if (f.values.size() != static_cast<std::size_t>(f.height) * static_cast<std::size_t>(f.width))
        throw DimensionError("density field size mismatch");
    std::string s = "P2\n" + std::to_string(f.width) + " " + std::to_string(f.height) + "\n255\n";
    for (int r = 0; r < f.height; ++r) {
        for (int c = 0; c < f.width; ++c) {
            const double v = std::clamp(f.values[static_cast<std::size_t>(r * f.width + c)], 0.0, 1.0);
            s += std::to_string(static_cast<int>(std::lround(255.0 * (1.0 - v))));
            s += c + 1 < f.width ? ' ' : '\n';
        }
    }
    write_text(s, path);
}

std::string colormap(double t) {
    static const std::array<std::array<double, 3>, 5> stops{
        {{68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};
    if (!std::isfinite(t)) return "#bbbbbb";
    t = std::clamp(t, 0.0, 1.0) * (stops.size() - 1);
    const auto i = std::min<std::size_t>(static_cast<std::size_t>(t), stops.size() - 2);
    const double f = t - static_cast<double>(i);
    char buf[8];
    int rgb[3];
    for (int k = 0; k < 3; ++k) rgb[k] = static_cast<int>(std::lround(stops[i][k] + f * (stops[i + 1][k] - stops[i][k])));
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
    return buf;
}

std::string svg_bitmap(const Microstructure& m, int scale) {
    std::string s = svg_open(m.width() * scale, m.height() * scale);
    s += cell_rects(m, 0, 0, scale);
    return s + "</svg>\n";
}

std::string svg_filmstrip(const std::vector<Microstructure>& cells, const std::vector<std::string>& captions,
                          int scale) {
    const double gap = 6, caption_h = captions.empty() ? 0 : 14;
    double w = gap, h = 0;
    for (const auto& c : cells) {
        w += c.width() * scale + gap;
        h = std::max(h, static_cast<double>(c.height() * scale));
    }
    h += 2 * gap + caption_h;
    std::string s = svg_open(w, h);
    double x = gap;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto& c = cells[i];
        s += "<rect x=\"" + num(x - 0.5) + "\" y=\"" + num(gap - 0.5) + "\" width=\"" + num(c.width() * scale + 1.0) +
             "\" height=\"" + num(c.height() * scale + 1.0) + "\" fill=\"none\" stroke=\"#999999\"/>\n";
        s += cell_rects(c, x, gap, scale);
        if (i < captions.size())
            s += "<text x=\"" + num(x) + "\" y=\"" + num(gap + c.height() * scale + 12) +
                 "\" font-family=\"sans-serif\" font-size=\"10\">" + escape(captions[i]) + "</text>\n";
        x += c.width() * scale + gap;
    }
    return s + "</svg>\n";
}

std::string svg_heatmap(int nx, int ny, const std::vector<double>& values, const std::string& title) {
    if (nx < 1 || ny < 1 || values.size() != static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny))
        throw DimensionError("heatmap size mismatch");
    const double cell = std::max(8.0, 480.0 / std::max(nx, ny)), top = 28, left = 10, bar = 36;
    const double w = left + nx * cell + bar + 60, h = top + ny * cell + 16;
    const auto [lo, hi] = finite_range(values);
    std::string s = svg_open(w, h);
    s += "<text x=\"" + num(left) + "\" y=\"18\" font-family=\"sans-serif\" font-size=\"13\">" + escape(title) +
         "</text>\n";
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
            const double v = values[static_cast<std::size_t>(iy * nx + ix)];
            s += "<rect x=\"" + num(left + ix * cell) + "\" y=\"" + num(top + (ny - 1 - iy) * cell) + "\" width=\"" +
                 num(cell) + "\" height=\"" + num(cell) + "\" fill=\"" + colormap((v - lo) / (hi - lo)) + "\"/>\n";
        }
    const double bx = left + nx * cell + 12, bh = ny * cell;
    for (int k = 0; k < 32; ++k)
        s += "<rect x=\"" + num(bx) + "\" y=\"" + num(top + bh * (31 - k) / 32.0) + "\" width=\"12\" height=\"" +
             num(bh / 32.0 + 0.5) + "\" fill=\"" + colormap(k / 31.0) + "\"/>\n";
    s += "<text x=\"" + num(bx + 16) + "\" y=\"" + num(top + 10) + "\" font-family=\"sans-serif\" font-size=\"10\">" +
         num(hi) + "</text>\n";
    s += "<text x=\"" + num(bx + 16) + "\" y=\"" + num(top + bh) + "\" font-family=\"sans-serif\" font-size=\"10\">" +
         num(lo) + "</text>\n";
    return s + "</svg>\n";
}

std::string svg_scatter(const std::vector<double>& x, const std::vector<double>& y,
                        const std::vector<double>& colour_values, const std::string& title,
                        const std::string& x_label, const std::string& y_label) {
    if (x.size() != y.size() || (!colour_values.empty() && colour_values.size() != x.size()))
        throw DimensionError("scatter size mismatch");
    const double w = 520, h = 480, l = 56, r = 16, t = 32, b = 48;
    const auto [x0, x1] = finite_range(x);
    const auto [y0, y1] = finite_range(y);
    const auto [c0, c1] = finite_range(colour_values);
    std::string s = svg_open(w, h);
    s += "<text x=\"" + num(l) + "\" y=\"20\" font-family=\"sans-serif\" font-size=\"13\">" + escape(title) +
         "</text>\n";
    s += "<rect x=\"" + num(l) + "\" y=\"" + num(t) + "\" width=\"" + num(w - l - r) + "\" height=\"" +
         num(h - t - b) + "\" fill=\"none\" stroke=\"#333333\"/>\n";
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) continue;
        const double px = l + (x[i] - x0) / (x1 - x0) * (w - l - r);
        const double py = h - b - (y[i] - y0) / (y1 - y0) * (h - t - b);
        const std::string fill = colour_values.empty() ? "#3b528b" : colormap((colour_values[i] - c0) / (c1 - c0));
        s += "<circle cx=\"" + num(px) + "\" cy=\"" + num(py) + "\" r=\"2\" fill=\"" + fill + "\"/>\n";
    }
    s += "<text x=\"" + num(l) + "\" y=\"" + num(h - 28) + "\" font-family=\"sans-serif\" font-size=\"10\">" + num(x0) +
         "</text>\n";
    s += "<text x=\"" + num(w - r) + "\" y=\"" + num(h - 28) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" + num(x1) + "</text>\n";
    s += "<text x=\"" + num((l + w - r) / 2) + "\" y=\"" + num(h - 10) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + escape(x_label) + "</text>\n";
    s += "<text x=\"14\" y=\"" + num((t + h - b) / 2) + "\" transform=\"rotate(-90 14 " + num((t + h - b) / 2) +
         ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + escape(y_label) + "</text>\n";
    s += "<text x=\"" + num(l - 4) + "\" y=\"" + num(h - b) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" + num(y0) + "</text>\n";
    s += "<text x=\"" + num(l - 4) + "\" y=\"" + num(t + 8) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" + num(y1) + "</text>\n";
    return s + "</svg>\n";
}

}  // namespace metadesign
