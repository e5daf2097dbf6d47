#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "cli.hpp"
#include "mesbench/core/errors.hpp"

namespace mesbench::cli {

namespace {

struct Table {
	std::vector<std::string> header;
	std::vector<std::vector<double>> cols;

	int find(const std::string &name) const {
		auto it = std::find(header.begin(), header.end(), name);
		return it == header.end() ? -1 : static_cast<int>(it - header.begin());
	}
};

std::vector<std::string> split(const std::string &line) {
	std::vector<std::string> out;
	std::stringstream ss(line);
	std::string cell;
	while (std::getline(ss, cell, ','))
		out.push_back(cell);
	return out;
}

Table read_table(std::istream &in) {
	Table t;
	std::string line;
	if (!std::getline(in, line))
		throw ParseError("plot: empty CSV");
	if (!line.empty() && line.back() == '\r')
		line.pop_back();
	t.header = split(line);
	t.cols.resize(t.header.size());
	std::size_t row = 1;
	while (std::getline(in, line)) {
		++row;
		if (!line.empty() && line.back() == '\r')
			line.pop_back();
		if (line.empty())
			continue;
		auto cells = split(line);
		if (cells.size() != t.header.size())
			throw ParseError("plot: row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
			                 " fields, header has " + std::to_string(t.header.size()));
		for (std::size_t j = 0; j < cells.size(); ++j) {
			char *end = nullptr;
			double v = std::strtod(cells[j].c_str(), &end);
			if (end == cells[j].c_str())
				v = std::nan(""); // non-numeric cells (names, status) are skipped when drawing
			t.cols[j].push_back(v);
		}
	}
	if (t.cols.empty() || t.cols[0].empty())
		throw ParseError("plot: CSV has no data rows");
	return t;
}

const char *kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string fmt(double v) {
	char buf[32];
	std::snprintf(buf, sizeof buf, "%.4g", v);
	return buf;
}

struct Frame {
	double x0, x1, y0, y1;
	static constexpr double W = 960, H = 480, L = 70, R = 200, T = 40, B = 50;
	double px(double x) const { return L + (x - x0) / (x1 - x0) * (W - L - R); }
	double py(double y) const { return H - B - (y - y0) / (y1 - y0) * (H - T - B); }
};

void frame_open(std::ostream &o, const Frame &f, const std::string &title, const std::string &xlabel,
                const std::string &ylabel) {
	o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << Frame::W << "\" height=\"" << Frame::H
	  << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
	o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
	o << "<text x=\"" << Frame::W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n";
	const double xl = Frame::L, xr = Frame::W - Frame::R, yt = Frame::T, yb = Frame::H - Frame::B;
	o << "<rect x=\"" << xl << "\" y=\"" << yt << "\" width=\"" << xr - xl << "\" height=\"" << yb - yt
	  << "\" fill=\"none\" stroke=\"black\"/>\n";
	for (int i = 0; i <= 4; ++i) {
		const double xv = f.x0 + (f.x1 - f.x0) * i / 4.0, yv = f.y0 + (f.y1 - f.y0) * i / 4.0;
		o << "<text x=\"" << f.px(xv) << "\" y=\"" << yb + 16 << "\" text-anchor=\"middle\">" << fmt(xv) << "</text>\n";
		o << "<text x=\"" << xl - 6 << "\" y=\"" << f.py(yv) + 4 << "\" text-anchor=\"end\">" << fmt(yv) << "</text>\n";
		o << "<line x1=\"" << xl << "\" x2=\"" << xr << "\" y1=\"" << f.py(yv) << "\" y2=\"" << f.py(yv)
		  << "\" stroke=\"#ddd\"/>\n";
	}
	o << "<text x=\"" << (xl + xr) / 2 << "\" y=\"" << Frame::H - 12 << "\" text-anchor=\"middle\">" << xlabel
	  << "</text>\n";
	o << "<text x=\"16\" y=\"" << (yt + yb) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
	  << (yt + yb) / 2 << ")\">" << ylabel << "</text>\n";
}

void polyline(std::ostream &o, const Frame &f, const std::vector<double> &x, const std::vector<double> &y,
              const char *color) {
	o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
	for (std::size_t i = 0; i < x.size(); ++i)
		if (std::isfinite(y[i]))
			o << fmt(f.px(x[i])) << ',' << fmt(f.py(y[i])) << ' ';
	o << "\"/>\n";
}

void legend(std::ostream &o, const std::vector<std::string> &names) {
	for (std::size_t i = 0; i < names.size(); ++i) {
		const double y = Frame::T + 14 + 18.0 * i, x = Frame::W - Frame::R + 12;
		o << "<line x1=\"" << x << "\" x2=\"" << x + 20 << "\" y1=\"" << y - 4 << "\" y2=\"" << y - 4 << "\" stroke=\""
		  << kPalette[i % 10] << "\" stroke-width=\"2\"/>\n";
		o << "<text x=\"" << x + 26 << "\" y=\"" << y << "\">" << names[i] << "</text>\n";
	}
}

void y_range(const std::vector<const std::vector<double> *> &ys, double &lo, double &hi) {
	lo = std::numeric_limits<double>::infinity();
	hi = -lo;
	for (const auto *y : ys)
		for (double v : *y)
			if (std::isfinite(v)) {
				lo = std::min(lo, v);
				hi = std::max(hi, v);
			}
	if (!(lo <= hi))
		lo = 0.0, hi = 1.0;
	if (hi - lo < 1e-12) {
		lo -= 0.5;
		hi += 0.5;
	}
	const double pad = 0.05 * (hi - lo);
	lo -= pad;
	hi += pad;
}

} // namespace

void plot_dispatch_svg(std::istream &csv, std::ostream &svg, const std::vector<std::string> &columns) {
	const Table t = read_table(csv);
	std::vector<std::string> names = columns;
	if (names.empty())
		for (const auto &h : t.header)
			if (h.size() > 3 && h.compare(h.size() - 3, 3, "_mw") == 0)
				names.push_back(h);
	if (names.empty())
		throw ParseError("plot: no power columns (*_mw) to draw");
	std::vector<const std::vector<double> *> ys;
	for (const auto &n : names) {
		const int j = t.find(n);
		if (j < 0)
			throw ParseError("plot: no column named '" + n + "'");
		ys.push_back(&t.cols[j]);
	}
	std::vector<double> x(t.cols[0].size());
	const int step = t.find("step");
	for (std::size_t i = 0; i < x.size(); ++i)
		x[i] = step >= 0 ? t.cols[step][i] : static_cast<double>(i);
	Frame f{x.front(), x.back() > x.front() ? x.back() : x.front() + 1.0, 0.0, 1.0};
	y_range(ys, f.y0, f.y1);
	frame_open(svg, f, "Dispatch", "time step", "MW");
	for (std::size_t i = 0; i < ys.size(); ++i)
		polyline(svg, f, x, *ys[i], kPalette[i % 10]);
	legend(svg, names);
	svg << "</svg>\n";
}

void plot_curve_svg(std::istream &csv, std::ostream &svg) {
	const Table t = read_table(csv);
	const int js = t.find("step"), jm = t.find("mean_return"), jd = t.find("std_return");
	if (js < 0 || jm < 0 || jd < 0)
		throw ParseError("plot: learning-curve CSV needs step, mean_return and std_return columns");
	const auto &x = t.cols[js], &m = t.cols[jm], &d = t.cols[jd];
	std::vector<double> lo(m.size()), hi(m.size());
	for (std::size_t i = 0; i < m.size(); ++i) {
		lo[i] = m[i] - d[i];
		hi[i] = m[i] + d[i];
	}
	std::vector<const std::vector<double> *> ys{&lo, &hi};
	std::vector<std::string> names{"mean"};
	for (std::size_t j = 0; j < t.header.size(); ++j)
		if (t.header[j].rfind("seed_", 0) == 0) {
			ys.push_back(&t.cols[j]);
			names.push_back(t.header[j]);
		}
	Frame f{x.front(), x.back() > x.front() ? x.back() : x.front() + 1.0, 0.0, 1.0};
	y_range(ys, f.y0, f.y1);
	frame_open(svg, f, "Learning curve", "training steps", "held-out return");
	svg << "<polygon fill=\"" << kPalette[0] << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
	for (std::size_t i = 0; i < x.size(); ++i)
		svg << fmt(f.px(x[i])) << ',' << fmt(f.py(hi[i])) << ' ';
	for (std::size_t i = x.size(); i-- > 0;)
		svg << fmt(f.px(x[i])) << ',' << fmt(f.py(lo[i])) << ' ';
	svg << "\"/>\n";
	polyline(svg, f, x, m, kPalette[0]);
	for (std::size_t k = 1; k < names.size(); ++k)
		polyline(svg, f, x, *ys[k + 1], kPalette[k % 10]);
	legend(svg, names);
	svg << "</svg>\n";
}

} // namespace mesbench::cli
