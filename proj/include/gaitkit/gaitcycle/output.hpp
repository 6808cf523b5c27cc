#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "gaitkit/gaitcycle/cycles.hpp"
#include "gaitkit/util/csv.hpp"

namespace gaitkit::gaitcycle {

/// percent,side,joint,mean_deg,sd_deg,n_cycles. Undefined points are skipped.
inline std::string format_ensemble_csv(std::span<const CycleEnsemble> ensembles) {
  std::string out = "percent,side,joint,mean_deg,sd_deg,n_cycles\n";
  for (const auto& e : ensembles) {
    for (AngleJoint j : kAngleJoints) {
      for (std::size_t k = 0; k < kCyclePoints; ++k) {
        if (!e.defined(j, k)) continue;
        const auto ji = static_cast<std::size_t>(j);
        out += std::to_string(k) + "," + std::string(side_name(e.side)) + "," +
               std::string(kinematics::angle_joint_name(j)) + "," + util::fmt_double(e.mean[ji][k]) + "," +
               util::fmt_double(e.sd[ji][k]) + "," + std::to_string(e.count[ji][k]) + "\n";
      }
    }
  }
  return out;
}

/// Mean curves read back from an ensemble CSV; SD and counts are kept, the
/// individual cycles are not.
inline std::vector<CycleEnsemble> parse_ensemble_csv(std::string_view text) {
  const auto table = util::parse_csv(text);
  const auto cp = table.column("percent"), cs = table.column("side"), cj = table.column("joint"),
             cm = table.column("mean_deg"), csd = table.column("sd_deg"), cn = table.column("n_cycles");
  std::map<Side, CycleEnsemble> by_side;
  for (const auto& r : table.rows) {
    const Side side = side_from_name(r[cs]);
    auto& e = by_side[side];
    e.side = side;
    const auto ji = static_cast<std::size_t>(kinematics::angle_joint_from_name(r[cj]));
    const auto k = static_cast<std::size_t>(util::parse_long(r[cp]));
    if (k >= kCyclePoints) throw Error(ErrorCode::MalformedDocument, "percent out of range");
    e.mean[ji][k] = util::parse_double(r[cm]);
    e.sd[ji][k] = util::parse_double(r[csd]);
    e.count[ji][k] = static_cast<std::size_t>(util::parse_long(r[cn]));
  }
  std::vector<CycleEnsemble> out;
  for (auto& [s, e] : by_side) out.push_back(std::move(e));
  return out;
}

struct PlotSeries {
  std::string method;
  const CycleEnsemble* ensemble;
};

/// method,side,joint,percent,mean_deg,lower_deg,upper_deg (mean -/+ one SD).
inline std::string format_plot_data(std::span<const PlotSeries> series) {
  std::string out = "method,side,joint,percent,mean_deg,lower_deg,upper_deg\n";
  for (const auto& s : series) {
    for (AngleJoint j : kAngleJoints) {
      const auto ji = static_cast<std::size_t>(j);
      for (std::size_t k = 0; k < kCyclePoints; ++k) {
        if (!s.ensemble->defined(j, k)) continue;
        const double m = s.ensemble->mean[ji][k], sd = s.ensemble->sd[ji][k];
        out += s.method + "," + std::string(side_name(s.ensemble->side)) + "," +
               std::string(kinematics::angle_joint_name(j)) + "," + std::to_string(k) + "," + util::fmt_double(m) +
               "," + util::fmt_double(m - sd) + "," + util::fmt_double(m + sd) + "\n";
      }
    }
  }
  return out;
}

/// Three stacked panels (hip, knee, ankle) of mean curves against percent of
/// gait cycle, one polyline per series, with a shaded +/- SD band.
inline std::string render_svg(std::span<const PlotSeries> series) {
  static constexpr const char* kColors[] = {"#2ca02c", "#1f77b4", "#d62728", "#9467bd", "#ff7f0e", "#8c564b"};
  constexpr double kW = 520, kH = 200, kLeft = 60, kTop = 30, kGap = 40;
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + util::fmt_fixed(kLeft + kW + 160, 0) +
                    "\" height=\"" + util::fmt_fixed(kTop + 3 * (kH + kGap), 0) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (AngleJoint j : kAngleJoints) {
    const auto ji = static_cast<std::size_t>(j);
    double lo = 1e300, hi = -1e300;
    for (const auto& s : series) {
      for (std::size_t k = 0; k < kCyclePoints; ++k) {
        if (!s.ensemble->defined(j, k)) continue;
        lo = std::min(lo, s.ensemble->mean[ji][k] - s.ensemble->sd[ji][k]);
        hi = std::max(hi, s.ensemble->mean[ji][k] + s.ensemble->sd[ji][k]);
      }
    }
    if (lo > hi) continue;
    if (hi - lo < 1.0) {
      lo -= 0.5;
      hi += 0.5;
    }
    const double y0 = kTop + static_cast<double>(ji) * (kH + kGap);
    auto px = [&](std::size_t k) { return kLeft + kW * static_cast<double>(k) / 100.0; };
    auto py = [&](double v) { return y0 + kH * (hi - v) / (hi - lo); };
    svg += "<rect x=\"" + util::fmt_fixed(kLeft, 1) + "\" y=\"" + util::fmt_fixed(y0, 1) + "\" width=\"" +
           util::fmt_fixed(kW, 1) + "\" height=\"" + util::fmt_fixed(kH, 1) + "\" fill=\"none\" stroke=\"#888\"/>\n";
    svg += "<text x=\"" + util::fmt_fixed(kLeft, 1) + "\" y=\"" + util::fmt_fixed(y0 - 8, 1) + "\">" +
           std::string(kinematics::angle_joint_name(j)) + " angle (deg)  [" + util::fmt_fixed(lo, 1) + ", " +
           util::fmt_fixed(hi, 1) + "]</text>\n";
    if (lo < 0 && hi > 0) {
      svg += "<line x1=\"" + util::fmt_fixed(kLeft, 1) + "\" x2=\"" + util::fmt_fixed(kLeft + kW, 1) + "\" y1=\"" +
             util::fmt_fixed(py(0), 1) + "\" y2=\"" + util::fmt_fixed(py(0), 1) + "\" stroke=\"#ccc\"/>\n";
    }
    for (std::size_t si = 0; si < series.size(); ++si) {
      const auto& e = *series[si].ensemble;
      const char* color = kColors[si % std::size(kColors)];
      std::string band, line;
      for (std::size_t k = 0; k < kCyclePoints; ++k) {
        if (!e.defined(j, k)) continue;
        line += util::fmt_fixed(px(k), 2) + "," + util::fmt_fixed(py(e.mean[ji][k]), 2) + " ";
        band += util::fmt_fixed(px(k), 2) + "," + util::fmt_fixed(py(e.mean[ji][k] + e.sd[ji][k]), 2) + " ";
      }
      for (std::size_t k = kCyclePoints; k-- > 0;) {
        if (!e.defined(j, k)) continue;
        band += util::fmt_fixed(px(k), 2) + "," + util::fmt_fixed(py(e.mean[ji][k] - e.sd[ji][k]), 2) + " ";
      }
      svg += "<polygon points=\"" + band + "\" fill=\"" + color + "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
      svg += "<polyline points=\"" + line + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\"/>\n";
      if (ji == 0) {
        svg += "<text x=\"" + util::fmt_fixed(kLeft + kW + 12, 1) + "\" y=\"" +
               util::fmt_fixed(kTop + 14.0 * static_cast<double>(si + 1), 1) + "\" fill=\"" + color + "\">" +
               series[si].method + " " + std::string(side_name(e.side)) + "</text>\n";
      }
    }
  }
  svg += "<text x=\"" + util::fmt_fixed(kLeft + kW / 2 - 40, 1) + "\" y=\"" +
         util::fmt_fixed(kTop + 3 * (kH + kGap) - 12, 1) + "\">% gait cycle</text>\n</svg>\n";
  return svg;
}

}  // namespace gaitkit::gaitcycle
