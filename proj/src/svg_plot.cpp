#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "mfac/commands.hpp"

namespace mfac {

namespace {

struct Series {
  std::string label;
  std::vector<double> values;
};

constexpr std::array<const char*, 6> palette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string render(const std::string& title, const std::vector<double>& x, const std::vector<Series>& series) {
  constexpr double width = 800, height = 360, left = 60, right = 150, top = 30, bottom = 40;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& s : series) {
    for (double v : s.values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!(hi > lo)) {
    lo -= 1;
    hi += 1;
  }
  const double x0 = x.empty() ? 0 : x.front();
  const double x1 = x.size() < 2 ? x0 + 1 : x.back();
  const auto px = [&](double v) { return left + (v - x0) / (x1 - x0) * (width - left - right); };
  const auto py = [&](double v) { return top + (hi - v) / (hi - lo) * (height - top - bottom); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << left << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n"
      << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << width - left - right << "\" height=\""
      << height - top - bottom << "\" fill=\"none\" stroke=\"#888\"/>\n";
  for (const double tick : {lo, (lo + hi) / 2, hi}) {
    svg << "<text x=\"4\" y=\"" << py(tick) + 4 << "\" font-family=\"sans-serif\" font-size=\"11\">"
        << format_shortest(std::round(tick * 1000) / 1000) << "</text>\n";
  }
  svg << "<text x=\"" << left << "\" y=\"" << height - 10 << "\" font-family=\"sans-serif\" font-size=\"11\">i = "
      << x0 << ".." << x1 << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* color = palette[k % palette.size()];
    svg << "<polyline fill=\"none\" stroke-width=\"1.2\" stroke=\"" << color << "\" points=\"";
    for (std::size_t t = 0; t < x.size(); ++t) svg << px(x[t]) << ',' << py(series[k].values[t]) << ' ';
    svg << "\"/>\n"
        << "<text x=\"" << width - right + 10 << "\" y=\"" << top + 16 * (k + 1) << "\" fill=\"" << color
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << series[k].label << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void save(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

void write_trace_svgs(const SimulationTrace& trace, const std::filesystem::path& dir, const std::string& prefix) {
  const Index m = trace.dims.m;
  std::vector<double> x;
  for (const auto& s : trace.steps) x.push_back(static_cast<double>(s.i));
  const auto column = [&](auto pick) {
    std::vector<double> v;
    for (const auto& s : trace.steps) v.push_back(pick(s));
    return v;
  };

  for (Index j = 0; j < m; ++j) {
    const std::string name = "y" + std::to_string(j + 1);
    const std::vector<Series> series{{name, column([j](const StepRecord& s) { return s.y(j); })},
                                     {name + "^d", column([j](const StepRecord& s) { return s.y_ref(j); })}};
    save(dir / (prefix + "tracking_" + name + ".svg"), render("Tracking of " + name, x, series));
  }

  std::vector<Series> inputs;
  for (Index j = 0; j < m; ++j) {
    inputs.push_back({"u" + std::to_string(j + 1), column([j](const StepRecord& s) { return s.u(j); })});
  }
  save(dir / (prefix + "inputs.svg"), render("Control inputs", x, inputs));

  std::vector<Series> gains;
  const Index key = trace.dims.key_block() * m;
  for (Index r = 0; r < m; ++r) {
    for (Index c = 0; c < m; ++c) {
      gains.push_back({"phi_" + std::to_string(r + 1) + "_" + std::to_string(key + c + 1),
                       column([r, c, key](const StepRecord& s) { return s.phi(r, key + c); })});
    }
  }
  save(dir / (prefix + "input_gain.svg"), render("Estimated input gain block", x, gains));
}

}  // namespace mfac
