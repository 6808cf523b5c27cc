#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gaitkit/metrics/metrics.hpp"
#include "gaitkit/util/csv.hpp"

namespace gaitkit::metrics {

enum class Method { RawPose, ZeroShot };
enum class LimbRole { Prosthetic, Intact };

constexpr std::string_view method_name(Method m) { return m == Method::RawPose ? "RawPose" : "ZeroShot"; }
constexpr std::string_view role_name(LimbRole r) { return r == LimbRole::Prosthetic ? "Prosthetic" : "Intact"; }

constexpr LimbRole role_of(Side side, Side prosthetic) {
  return side == prosthetic ? LimbRole::Prosthetic : LimbRole::Intact;
}

constexpr std::string_view segment_name(Segment s) {
  switch (s) {
    case Segment::Hip: return "hip";
    case Segment::Knee: return "knee";
    case Segment::Ankle: return "ankle";
    case Segment::Toe: return "toe";
  }
  return "?";
}

inline constexpr std::string_view kReportSchemaVersion = "1";
inline constexpr std::string_view kSdDefinition = "sample standard deviation over pooled per-sample errors";

/// Raw error samples for one (method, limb role). Statistics are derived on
/// demand so several sequences can be pooled before summarizing.
struct RoleErrors {
  std::map<Segment, std::vector<double>> coordinates_px;
  std::map<AngleJoint, std::vector<double>> angles_deg;

  [[nodiscard]] std::vector<double> all_coordinates() const {
    std::vector<double> out;
    for (const auto& [s, d] : coordinates_px) out.insert(out.end(), d.begin(), d.end());
    return out;
  }
  [[nodiscard]] std::vector<double> all_angles() const {
    std::vector<double> out;
    for (const auto& [j, d] : angles_deg) out.insert(out.end(), d.begin(), d.end());
    return out;
  }
};

/// Method x limb role x {coordinates px, kinematics deg}, plus failure-frame
/// percentages per camera view.
struct ErrorReport {
  std::map<Method, std::map<LimbRole, RoleErrors>> errors;
  std::map<Method, std::map<CameraView, FailureStat>> failures;
  std::optional<ScaleEstimate> scale;
  std::size_t n_frames = 0;

  void merge_failures(Method m, const std::map<CameraView, FailureStat>& stats) {
    for (const auto& [view, s] : stats) {
      auto& dst = failures[m][view];
      dst.failed += s.failed;
      dst.total += s.total;
    }
  }

  [[nodiscard]] std::optional<ErrorStat> coordinates(Method m, LimbRole r) const {
    auto d = lookup(m, r);
    if (!d) return std::nullopt;
    auto all = d->all_coordinates();
    if (all.empty()) return std::nullopt;
    return summarize(all);
  }
  [[nodiscard]] std::optional<ErrorStat> kinematics(Method m, LimbRole r) const {
    auto d = lookup(m, r);
    if (!d) return std::nullopt;
    auto all = d->all_angles();
    if (all.empty()) return std::nullopt;
    return summarize(all);
  }

 private:
  [[nodiscard]] const RoleErrors* lookup(Method m, LimbRole r) const {
    auto mi = errors.find(m);
    if (mi == errors.end()) return nullptr;
    auto ri = mi->second.find(r);
    return ri == mi->second.end() ? nullptr : &ri->second;
  }
};

namespace detail {

inline nlohmann::json stat_json(const ErrorStat& s) { return {{"mae", s.mae}, {"sd", s.sd}, {"n", s.n}}; }

}  // namespace detail

inline nlohmann::json report_json(const ErrorReport& report) {
  using nlohmann::json;
  json methods = json::object();
  for (const auto& [m, roles] : report.errors) {
    json jm = json::object();
    for (const auto& [r, e] : roles) {
      json jr = json::object();
      if (auto c = report.coordinates(m, r)) {
        json per = json::object();
        for (const auto& [seg, d] : e.coordinates_px) per[std::string(segment_name(seg))] = detail::stat_json(summarize(d));
        jr["coordinates_px"] = detail::stat_json(*c);
        jr["coordinates_px"]["per_joint"] = per;
        if (report.scale) {
          jr["coordinates_cm"] = {{"mae", c->mae * report.scale->cm_per_pixel},
                                  {"sd", c->sd * report.scale->cm_per_pixel}};
        }
      }
      if (auto k = report.kinematics(m, r)) {
        json per = json::object();
        for (const auto& [j, d] : e.angles_deg) {
          per[std::string(kinematics::angle_joint_name(j))] = detail::stat_json(summarize(d));
        }
        jr["kinematics_deg"] = detail::stat_json(*k);
        jr["kinematics_deg"]["per_joint"] = per;
      }
      jm[std::string(role_name(r))] = jr;
    }
    methods[std::string(method_name(m))] = jm;
  }

  json improvement = json::object();
  for (LimbRole r : {LimbRole::Prosthetic, LimbRole::Intact}) {
    json jr = json::object();
    auto cb = report.coordinates(Method::RawPose, r), ca = report.coordinates(Method::ZeroShot, r);
    if (cb && ca && cb->mae > 0.0) jr["coordinates"] = improvement_percent(cb->mae, ca->mae);
    auto kb = report.kinematics(Method::RawPose, r), ka = report.kinematics(Method::ZeroShot, r);
    if (kb && ka && kb->mae > 0.0) jr["kinematics"] = improvement_percent(kb->mae, ka->mae);
    if (!jr.empty()) improvement[std::string(role_name(r))] = jr;
  }

  json failures = json::object();
  for (const auto& [m, views] : report.failures) {
    json jm = json::object();
    for (const auto& [v, s] : views) {
      jm[std::string(view_name(v))] = {{"failed", s.failed}, {"total", s.total}, {"percent", s.percent()}};
    }
    failures[std::string(method_name(m))] = jm;
  }

  json out = {{"schema_version", kReportSchemaVersion},
              {"sd_definition", kSdDefinition},
              {"n_frames", report.n_frames},
              {"methods", methods},
              {"improvement_percent", improvement},
              {"failure_frames", failures}};
  if (report.scale) out["scale"] = {{"cm_per_pixel", report.scale->cm_per_pixel}, {"source", "SubjectHeight"}};
  return out;
}

/// Human-readable table laid out as method columns against limb-role rows.
inline std::string render_report_table(const ErrorReport& report) {
  auto pad = [](std::string s, std::size_t w) {
    if (s.size() < w) s.append(w - s.size(), ' ');
    return s;
  };
  std::vector<Method> methods;
  for (const auto& [m, r] : report.errors) methods.push_back(m);
  for (const auto& [m, r] : report.failures) {
    if (std::find(methods.begin(), methods.end(), m) == methods.end()) methods.push_back(m);
  }
  std::sort(methods.begin(), methods.end());
  const bool both = methods.size() == 2;

  std::string out = pad("", 26);
  for (Method m : methods) out += pad(std::string(method_name(m)) + " (MAE)", 22);
  if (both) out += "Improvement";
  out += "\n";

  auto block = [&](const char* title, bool pixels) {
    out += std::string(title) + "\n";
    for (LimbRole r : {LimbRole::Prosthetic, LimbRole::Intact}) {
      std::string line = pad("  " + std::string(role_name(r)), 26);
      std::vector<std::optional<ErrorStat>> stats;
      bool any = false;
      for (Method m : methods) {
        auto s = pixels ? report.coordinates(m, r) : report.kinematics(m, r);
        stats.push_back(s);
        any = any || s.has_value();
        std::string cell = "-";
        if (s) cell = pixels ? display_pixels(*s) : util::fmt_fixed(s->mae, 2) + " (" + util::fmt_fixed(s->sd, 2) + ")";
        line += pad(cell, 22);
      }
      if (!any) continue;
      if (both && stats[0] && stats[1] && stats[0]->mae > 0.0) {
        line += display_percent(improvement_percent(stats[0]->mae, stats[1]->mae));
      }
      out += line + "\n";
    }
  };
  block("Coordinates (px)", true);
  block("Joint kinematics (deg)", false);

  if (!report.failures.empty()) {
    out += "Failure frames (%)\n";
    std::vector<CameraView> views;
    for (const auto& [m, vs] : report.failures) {
      for (const auto& [v, s] : vs) {
        if (std::find(views.begin(), views.end(), v) == views.end()) views.push_back(v);
      }
    }
    std::sort(views.begin(), views.end());
    for (CameraView v : views) {
      std::string line = pad("  " + std::string(view_name(v)), 26);
      for (Method m : methods) {
        std::string cell = "-";
        if (auto mi = report.failures.find(m); mi != report.failures.end()) {
          if (auto vi = mi->second.find(v); vi != mi->second.end()) {
            cell = util::fmt_fixed(vi->second.percent(), 1) + " (" + std::to_string(vi->second.failed) + "/" +
                   std::to_string(vi->second.total) + ")";
          }
        }
        line += pad(cell, 22);
      }
      out += line + "\n";
    }
  }
  if (report.scale) out += "Scale: " + util::fmt_fixed(report.scale->cm_per_pixel, 3) + " cm/px (subject height)\n";
  out += "SD: " + std::string(kSdDefinition) + "\n";
  return out;
}

}  // namespace gaitkit::metrics
