#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "framecon/montecarlo.hpp"

namespace framecon::mc {

namespace {

constexpr double kWidth = 640, kHeight = 440;
constexpr double kLeft = 70, kRight = 610, kTop = 40, kBottom = 390;

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

struct Axis {
    double lo = 0, hi = 1;
    bool log = false;
    double to_px(double v, double px_lo, double px_hi) const {
        double t;
        if (log) {
            t = (std::log10(v) - std::log10(lo)) / (std::log10(hi) - std::log10(lo));
        } else {
            t = (v - lo) / (hi - lo);
        }
        return px_lo + t * (px_hi - px_lo);
    }
};

std::string polyline(const std::vector<std::pair<double, double>>& pts, const Axis& x,
                     const Axis& y, const char* style) {
    std::ostringstream os;
    os << "<polyline fill=\"none\" " << style << " points=\"";
    for (const auto& [px, py] : pts)
        os << num(x.to_px(px, kLeft, kRight)) << ',' << num(y.to_px(py, kBottom, kTop)) << ' ';
    os << "\"/>\n";
    return os.str();
}

}  // namespace

void emit_plot(const std::vector<ExperimentRecord>& records, const std::filesystem::path& path,
               bool log_y) {
    if (records.empty()) throw std::invalid_argument("emit_plot requires at least one record");

    // sweep axis: n when it varies, otherwise eps
    bool n_varies = false;
    for (const auto& r : records) n_varies |= r.n != records.front().n;
    auto xval = [&](const ExperimentRecord& r) {
        return n_varies ? static_cast<double>(r.n) : r.eps;
    };

    Axis xa, ya;
    xa.lo = xval(records.front());
    xa.hi = xval(records.back());
    for (const auto& r : records) {
        xa.lo = std::min(xa.lo, xval(r));
        xa.hi = std::max(xa.hi, xval(r));
    }
    if (xa.hi == xa.lo) xa.hi = xa.lo + 1;

    const double floor_val = 1e-12;  // display floor for zeros on the log scale
    double ymin = 1e300, ymax = -1e300;
    auto feed = [&](double v) {
        if (!std::isfinite(v)) return;
        if (log_y && v <= 0) v = floor_val;
        ymin = std::min(ymin, v);
        ymax = std::max(ymax, v);
    };
    for (const auto& r : records) {
        feed(r.p_hat);
        feed(r.ci_low);
        feed(r.ci_high);
        feed(r.bound_raw);
    }
    if (ymin > ymax) { ymin = 0; ymax = 1; }
    ya.log = log_y;
    if (log_y) {
        ymin = std::max(ymin, floor_val);
        ya.lo = std::pow(10.0, std::floor(std::log10(ymin)));
        ya.hi = std::pow(10.0, std::ceil(std::log10(std::max(ymax, ymin * 10))));
    } else {
        ya.lo = 0;
        ya.hi = std::max(1.0, ymax) * 1.05;
    }

    auto display = [&](double v) {
        if (!std::isfinite(v)) return ya.lo;
        if (log_y && v <= 0) return floor_val;
        return std::clamp(v, ya.lo, ya.hi);
    };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // CI band
    std::ostringstream band;
    band << "<polygon fill=\"#aecbe8\" fill-opacity=\"0.5\" stroke=\"none\" points=\"";
    for (const auto& r : records)
        band << num(xa.to_px(xval(r), kLeft, kRight)) << ','
             << num(ya.to_px(display(r.ci_high), kBottom, kTop)) << ' ';
    for (auto it = records.rbegin(); it != records.rend(); ++it)
        band << num(xa.to_px(xval(*it), kLeft, kRight)) << ','
             << num(ya.to_px(display(it->ci_low), kBottom, kTop)) << ' ';
    band << "\"/>\n";
    svg << band.str();

    std::vector<std::pair<double, double>> emp, bnd;
    for (const auto& r : records) {
        emp.emplace_back(xval(r), display(r.p_hat));
        if (std::isfinite(r.bound_raw)) bnd.emplace_back(xval(r), display(r.bound_raw));
    }
    svg << polyline(emp, xa, ya, "stroke=\"#1f77b4\" stroke-width=\"2\"");
    if (!bnd.empty())
        svg << polyline(bnd, xa, ya,
                        "stroke=\"#ff7f0e\" stroke-width=\"2\" stroke-dasharray=\"8,5\"");

    // axes
    svg << "<line x1=\"" << kLeft << "\" y1=\"" << kBottom << "\" x2=\"" << kRight
        << "\" y2=\"" << kBottom << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
        << kBottom << "\" stroke=\"black\"/>\n";

    // x ticks at each sweep point
    for (const auto& r : records) {
        const double px = xa.to_px(xval(r), kLeft, kRight);
        svg << "<line x1=\"" << num(px) << "\" y1=\"" << kBottom << "\" x2=\"" << num(px)
            << "\" y2=\"" << kBottom + 6 << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << num(px) << "\" y=\"" << kBottom + 20
            << "\" font-size=\"11\" text-anchor=\"middle\">" << num(xval(r)) << "</text>\n";
    }
    // y ticks: decades on log scale, fifths otherwise
    if (log_y) {
        for (double v = ya.lo; v <= ya.hi * 1.0001; v *= 10) {
            const double py = ya.to_px(v, kBottom, kTop);
            svg << "<line x1=\"" << kLeft - 6 << "\" y1=\"" << num(py) << "\" x2=\"" << kLeft
                << "\" y2=\"" << num(py) << "\" stroke=\"black\"/>\n"
                << "<text x=\"" << kLeft - 10 << "\" y=\"" << num(py + 4)
                << "\" font-size=\"11\" text-anchor=\"end\">" << num(v) << "</text>\n";
        }
    } else {
        for (int i = 0; i <= 5; ++i) {
            const double v = ya.lo + (ya.hi - ya.lo) * i / 5.0;
            const double py = ya.to_px(v, kBottom, kTop);
            svg << "<line x1=\"" << kLeft - 6 << "\" y1=\"" << num(py) << "\" x2=\"" << kLeft
                << "\" y2=\"" << num(py) << "\" stroke=\"black\"/>\n"
                << "<text x=\"" << kLeft - 10 << "\" y=\"" << num(py + 4)
                << "\" font-size=\"11\" text-anchor=\"end\">" << num(v) << "</text>\n";
        }
    }

    const auto& r0 = records.front();
    svg << "<text x=\"" << (kLeft + kRight) / 2 << "\" y=\"22\" font-size=\"14\" "
        << "text-anchor=\"middle\">" << r0.model << ": P(" << r0.norm_or_stat
        << " &#8805; eps), d=" << r0.d << "</text>\n"
        << "<text x=\"" << (kLeft + kRight) / 2 << "\" y=\"" << kBottom + 38
        << "\" font-size=\"12\" text-anchor=\"middle\">" << (n_varies ? "n" : "eps")
        << "</text>\n"
        << "<text x=\"" << kRight - 4 << "\" y=\"" << kTop + 14
        << "\" font-size=\"12\" text-anchor=\"end\" fill=\"#1f77b4\">empirical</text>\n"
        << "<text x=\"" << kRight - 4 << "\" y=\"" << kTop + 30
        << "\" font-size=\"12\" text-anchor=\"end\" fill=\"#ff7f0e\">bound</text>\n"
        << "</svg>\n";

    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os << svg.str();
    if (!os) throw std::runtime_error("write to " + path.string() + " failed");
}

}  // namespace framecon::mc
