#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "owlsim/scenario.hpp"

namespace owlsim::svg {

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

/// Self-contained SVG line plot of a sweep: one polyline per scheme with
/// markers and 95% CI whiskers, inline axis labels and legend, no external
/// references.
inline std::string sweep_svg(const scenario::SweepResult& sweep,
                             const std::string& y_label =
                                 "mean_user_rate_bps") {
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c",
                                  "#9467bd", "#ff7f0e", "#8c564b"};
  const double width = 800, height = 560;
  const double ml = 90, mr = 30, mt = 30, mb = 70;
  const double pw = width - ml - mr, ph = height - mt - mb;

  // Curves keyed by scheme identity, points in sweep order (ascending param).
  std::map<std::string, std::vector<const scenario::SweepPoint*>> curves;
  std::vector<std::string> order;
  for (const auto& p : sweep.points) {
    std::string key = p.scheme.label();
    if (p.scheme.groups > 0) key += " G=" + std::to_string(p.scheme.groups);
    if (!curves.count(key)) order.push_back(key);
    curves[key].push_back(&p);
  }

  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  bool first = true;
  for (const auto& p : sweep.points) {
    if (first) {
      xmin = xmax = p.param;
      ymin = p.user_rate.ci95_lo;
      ymax = p.user_rate.ci95_hi;
      first = false;
    }
    xmin = std::min(xmin, p.param);
    xmax = std::max(xmax, p.param);
    ymin = std::min(ymin, p.user_rate.ci95_lo);
    ymax = std::max(ymax, p.user_rate.ci95_hi);
  }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  const double ypad = 0.05 * (ymax - ymin);
  ymin = std::max(0.0, ymin - ypad);
  ymax += ypad;

  auto sx = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
  auto sy = [&](double y) {
    return mt + ph - (y - ymin) / (ymax - ymin) * ph;
  };

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) +
       "\" height=\"" + num(height) + "\" viewBox=\"0 0 " + num(width) + " " +
       num(height) + "\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // Axes.
  s += "<line x1=\"" + num(ml) + "\" y1=\"" + num(mt + ph) + "\" x2=\"" +
       num(ml + pw) + "\" y2=\"" + num(mt + ph) +
       "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  s += "<line x1=\"" + num(ml) + "\" y1=\"" + num(mt) + "\" x2=\"" + num(ml) +
       "\" y2=\"" + num(mt + ph) +
       "\" stroke=\"black\" stroke-width=\"1\"/>\n";

  const int nticks = 5;
  for (int i = 0; i <= nticks; ++i) {
    const double xv = xmin + (xmax - xmin) * i / nticks;
    const double yv = ymin + (ymax - ymin) * i / nticks;
    s += "<line x1=\"" + num(sx(xv)) + "\" y1=\"" + num(mt + ph) + "\" x2=\"" +
         num(sx(xv)) + "\" y2=\"" + num(mt + ph + 5) +
         "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(sx(xv)) + "\" y=\"" + num(mt + ph + 20) +
         "\" font-family=\"sans-serif\" font-size=\"12\" "
         "text-anchor=\"middle\">" +
         num(xv) + "</text>\n";
    s += "<line x1=\"" + num(ml - 5) + "\" y1=\"" + num(sy(yv)) + "\" x2=\"" +
         num(ml) + "\" y2=\"" + num(sy(yv)) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(ml - 8) + "\" y=\"" + num(sy(yv) + 4) +
         "\" font-family=\"sans-serif\" font-size=\"12\" "
         "text-anchor=\"end\">" +
         num(yv) + "</text>\n";
  }
  s += "<text x=\"" + num(ml + pw / 2) + "\" y=\"" + num(height - 15) +
       "\" font-family=\"sans-serif\" font-size=\"14\" "
       "text-anchor=\"middle\">" +
       sweep.param_name + "</text>\n";
  s += "<text x=\"20\" y=\"" + num(mt + ph / 2) +
       "\" font-family=\"sans-serif\" font-size=\"14\" "
       "text-anchor=\"middle\" transform=\"rotate(-90 20 " +
       num(mt + ph / 2) + ")\">" + y_label + "</text>\n";

  int ci = 0;
  double ly = mt + 12;
  for (const auto& key : order) {
    const auto& pts = curves[key];
    const std::string color = kColors[ci % 6];
    std::string poly;
    for (const auto* p : pts)
      poly += num(sx(p->param)) + "," + num(sy(p->user_rate.mean)) + " ";
    s += "<polyline fill=\"none\" stroke=\"" + color +
         "\" stroke-width=\"2\" points=\"" + poly + "\"/>\n";
    for (const auto* p : pts) {
      s += "<circle cx=\"" + num(sx(p->param)) + "\" cy=\"" +
           num(sy(p->user_rate.mean)) + "\" r=\"3\" fill=\"" + color +
           "\"/>\n";
      s += "<line x1=\"" + num(sx(p->param)) + "\" y1=\"" +
           num(sy(p->user_rate.ci95_lo)) + "\" x2=\"" + num(sx(p->param)) +
           "\" y2=\"" + num(sy(p->user_rate.ci95_hi)) + "\" stroke=\"" +
           color + "\" stroke-width=\"1\"/>\n";
    }
    s += "<line x1=\"" + num(ml + pw - 150) + "\" y1=\"" + num(ly) +
         "\" x2=\"" + num(ml + pw - 125) + "\" y2=\"" + num(ly) +
         "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + num(ml + pw - 118) + "\" y=\"" + num(ly + 4) +
         "\" font-family=\"sans-serif\" font-size=\"12\">" + key +
         "</text>\n";
    ly += 18;
    ++ci;
  }
  s += "</svg>\n";
  return s;
}

}  // namespace owlsim::svg
