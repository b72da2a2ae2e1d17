#include "covertslot/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "covertslot/errors.hpp"

namespace covertslot::svg {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string fmt_tick(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape_text(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_line_chart(const ChartSpec& spec) {
  if (spec.series.empty()) throw InvalidParameters("chart needs a series");
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : spec.series) {
    if (s.x.size() != s.y.size())
      throw LengthMismatch("series x and y lengths differ");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      double xv = s.x[i];
      if (spec.log_x && !(xv > 0.0))
        throw InvalidParameters("log axis needs positive x values");
      xmin = std::min(xmin, xv);
      xmax = std::max(xmax, xv);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  }
  if (!(xmin <= xmax) || !(ymin <= ymax))
    throw InvalidParameters("chart needs at least one point");
  if (xmin == xmax) {
    xmin -= 1.0;
    xmax += 1.0;
  }
  double ypad = (ymax - ymin) * 0.08;
  if (ypad == 0.0) ypad = std::abs(ymax) * 0.1 + 0.1;
  ymin -= ypad;
  ymax += ypad;

  const double ml = 70, mr = 20, mt = 40, mb = 55;
  double pw = spec.width - ml - mr;
  double ph = spec.height - mt - mb;
  auto tx = [&](double x) {
    double u = spec.log_x ? std::log10(x) : x;
    double lo = spec.log_x ? std::log10(xmin) : xmin;
    double hi = spec.log_x ? std::log10(xmax) : xmax;
    return hi == lo ? ml + pw / 2 : ml + (u - lo) / (hi - lo) * pw;
  };
  auto ty = [&](double y) { return mt + (ymax - y) / (ymax - ymin) * ph; };

  std::string out;
  char head[256];
  std::snprintf(head, sizeof head,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" "
                "height=\"%d\" viewBox=\"0 0 %d %d\">\n",
                spec.width, spec.height, spec.width, spec.height);
  out += head;
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<rect x=\"" + fmt(ml) + "\" y=\"" + fmt(mt) + "\" width=\"" +
         fmt(pw) + "\" height=\"" + fmt(ph) +
         "\" fill=\"none\" stroke=\"#333\"/>\n";
  out += "<text x=\"" + fmt(ml) + "\" y=\"24\" font-family=\"sans-serif\" "
         "font-size=\"15\" fill=\"#111\">" + escape_text(spec.title) +
         "</text>\n";

  // X ticks: decades when logarithmic, five even steps otherwise.
  std::vector<double> xticks;
  if (spec.log_x) {
    int lo = static_cast<int>(std::floor(std::log10(xmin)));
    int hi = static_cast<int>(std::ceil(std::log10(xmax)));
    for (int d = lo; d <= hi; ++d) {
      double v = std::pow(10.0, d);
      if (v >= xmin * 0.999 && v <= xmax * 1.001) xticks.push_back(v);
    }
    if (xticks.empty()) xticks = {xmin, xmax};
  } else {
    for (int k = 0; k <= 4; ++k) xticks.push_back(xmin + (xmax - xmin) * k / 4);
  }
  for (double v : xticks) {
    double px = tx(v);
    out += "<line x1=\"" + fmt(px) + "\" y1=\"" + fmt(mt + ph) + "\" x2=\"" +
           fmt(px) + "\" y2=\"" + fmt(mt + ph + 5) + "\" stroke=\"#333\"/>\n";
    out += "<text x=\"" + fmt(px) + "\" y=\"" + fmt(mt + ph + 20) +
           "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\" "
           "text-anchor=\"middle\">" + fmt_tick(v) + "</text>\n";
  }
  for (int k = 0; k <= 4; ++k) {
    double v = ymin + (ymax - ymin) * k / 4;
    double py = ty(v);
    out += "<line x1=\"" + fmt(ml - 5) + "\" y1=\"" + fmt(py) + "\" x2=\"" +
           fmt(ml) + "\" y2=\"" + fmt(py) + "\" stroke=\"#333\"/>\n";
    out += "<text x=\"" + fmt(ml - 9) + "\" y=\"" + fmt(py + 4) +
           "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\" "
           "text-anchor=\"end\">" + fmt_tick(v) + "</text>\n";
  }
  out += "<text x=\"" + fmt(ml + pw / 2) + "\" y=\"" +
         fmt(static_cast<double>(spec.height) - 12) +
         "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#111\" "
         "text-anchor=\"middle\">" + escape_text(spec.x_label) + "</text>\n";
  out += "<text x=\"16\" y=\"" + fmt(mt + ph / 2) +
         "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#111\" "
         "text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         fmt(mt + ph / 2) + ")\">" + escape_text(spec.y_label) + "</text>\n";

  double legend_y = mt + 14;
  for (const auto& s : spec.series) {
    std::string path;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      path += i ? " " : "";
      path += fmt(tx(s.x[i])) + "," + fmt(ty(s.y[i]));
    }
    out += "<polyline points=\"" + path + "\" fill=\"none\" stroke=\"" +
           s.color + "\" stroke-width=\"1.8\"";
    if (s.dashed) out += " stroke-dasharray=\"7 5\"";
    out += "/>\n";
    if (s.markers) {
      for (std::size_t i = 0; i < s.x.size(); ++i)
        out += "<circle cx=\"" + fmt(tx(s.x[i])) + "\" cy=\"" +
               fmt(ty(s.y[i])) + "\" r=\"3.2\" fill=\"" + s.color + "\"/>\n";
    }
    double lx = ml + pw - 210;
    out += "<line x1=\"" + fmt(lx) + "\" y1=\"" + fmt(legend_y) + "\" x2=\"" +
           fmt(lx + 26) + "\" y2=\"" + fmt(legend_y) + "\" stroke=\"" +
           s.color + "\" stroke-width=\"1.8\"" +
           (s.dashed ? " stroke-dasharray=\"7 5\"" : "") + "/>\n";
    out += "<text x=\"" + fmt(lx + 32) + "\" y=\"" + fmt(legend_y + 4) +
           "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">" +
           escape_text(s.label) + "</text>\n";
    legend_y += 16;
  }
  out += "</svg>\n";
  return out;
}

}  // namespace covertslot::svg
