#include "gf/plot.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace gf {
namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

} // namespace

void plot_csv_to_svg(const std::string& csv_path, const std::string& svg_path) {
    std::ifstream is(csv_path);
    if (!is) fail("plot: cannot open " + csv_path);
    std::string header;
    std::getline(is, header);
    if (header != "t,min_value,argmin_index,field_scale,dt")
        fail("plot: CSV schema mismatch in " + csv_path + " (header '" + header + "')");
    std::vector<double> ts, mins;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        std::vector<double> cells;
        while (std::getline(ls, cell, ',')) cells.push_back(std::strtod(cell.c_str(), nullptr));
        if (cells.size() != 5) fail("plot: malformed CSV row '" + line + "'");
        ts.push_back(cells[0]);
        mins.push_back(cells[1]);
    }
    if (ts.empty()) fail("plot: no data rows in " + csv_path);

    const double W = 720, H = 420, ml = 70, mr = 20, mt = 20, mb = 50;
    double t0 = ts.front(), t1 = ts.back();
    if (t1 <= t0) t1 = t0 + 1;
    double lo = mins[0], hi = mins[0];
    for (double v : mins) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double band = 1e-5;
    lo = std::min(lo, -2 * band);
    hi = std::max(hi, 2 * band);
    const double pad = 0.08 * (hi - lo);
    lo -= pad;
    hi += pad;
    const auto X = [&](double t) { return ml + (t - t0) / (t1 - t0) * (W - ml - mr); };
    const auto Y = [&](double v) { return H - mb - (v - lo) / (hi - lo) * (H - mt - mb); };

    std::ofstream os(svg_path, std::ios::binary);
    if (!os) fail("plot: cannot write " + svg_path);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(W) << "\" height=\""
       << fmt(H) << "\" viewBox=\"0 0 " << fmt(W) << " " << fmt(H) << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    // tolerance band at +-1e-5
    os << "<rect x=\"" << fmt(ml) << "\" y=\"" << fmt(Y(band)) << "\" width=\""
       << fmt(W - ml - mr) << "\" height=\"" << fmt(Y(-band) - Y(band))
       << "\" fill=\"#fdecec\"/>\n";
    os << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(Y(0)) << "\" x2=\"" << fmt(W - mr)
       << "\" y2=\"" << fmt(Y(0)) << "\" stroke=\"#999\" stroke-width=\"1\"/>\n";
    // axes
    os << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(mt) << "\" x2=\"" << fmt(ml)
       << "\" y2=\"" << fmt(H - mb) << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(H - mb) << "\" x2=\"" << fmt(W - mr)
       << "\" y2=\"" << fmt(H - mb) << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double t = t0 + (t1 - t0) * k / 4.0;
        os << "<text x=\"" << fmt(X(t)) << "\" y=\"" << fmt(H - mb + 18)
           << "\" font-size=\"11\" text-anchor=\"middle\">" << fmt(t) << "</text>\n";
        const double v = lo + (hi - lo) * k / 4.0;
        os << "<text x=\"" << fmt(ml - 6) << "\" y=\"" << fmt(Y(v) + 4)
           << "\" font-size=\"11\" text-anchor=\"end\">" << fmt(v) << "</text>\n";
    }
    os << "<text x=\"" << fmt((ml + W - mr) / 2) << "\" y=\"" << fmt(H - 10)
       << "\" font-size=\"12\" text-anchor=\"middle\">t</text>\n";
    os << "<polyline fill=\"none\" stroke=\"#1f5fbf\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (i) os << " ";
        os << fmt(X(ts[i])) << "," << fmt(Y(mins[i]));
    }
    os << "\"/>\n</svg>\n";
}

} // namespace gf
