#pragma once

#include <map>
#include <string>

#include "gaitkit/core/types.hpp"
#include "gaitkit/util/csv.hpp"

namespace gaitkit {

constexpr std::string_view state_name(SampleState s) {
  switch (s) {
    case SampleState::Missing: return "missing";
    case SampleState::Observed: return "observed";
    case SampleState::Interpolated: return "interpolated";
  }
  return "?";
}

inline SampleState state_from_name(std::string_view s) {
  for (auto st : {SampleState::Missing, SampleState::Observed, SampleState::Interpolated}) {
    if (state_name(st) == s) return st;
  }
  throw Error(ErrorCode::MalformedDocument, "unknown sample state '" + std::string(s) + "'");
}

/// Long-format CSV: frame,joint,x,y,confidence,state. The first line is a
/// `# sample_rate=<hz>` comment.
inline std::string format_trajectories_csv(const TrajectorySet& traj) {
  std::string out = "# sample_rate=" + util::fmt_double(traj.sample_rate) + "\n";
  out += "frame,joint,x,y,confidence,state\n";
  for (std::size_t t = 0; t < traj.length; ++t) {
    for (const auto& [j, s] : traj.joints) {
      out += std::to_string(traj.frame_at(t)) + "," + std::string(joint_name(j)) + "," + util::fmt_double(s.x[t]) +
             "," + util::fmt_double(s.y[t]) + "," + util::fmt_double(s.confidence[t]) + "," +
             std::string(state_name(s.state[t])) + "\n";
    }
  }
  return out;
}

inline TrajectorySet parse_trajectories_csv(std::string_view text) {
  TrajectorySet traj;
  std::string_view body = text;
  if (body.starts_with("# sample_rate=")) {
    const auto nl = body.find('\n');
    traj.sample_rate = util::parse_double(std::string(body.substr(14, nl - 14)));
    body = nl == std::string_view::npos ? std::string_view{} : body.substr(nl + 1);
  }
  const auto table = util::parse_csv(body);
  const auto cf = table.column("frame"), cj = table.column("joint"), cx = table.column("x"), cy = table.column("y"),
             cc = table.column("confidence"), cs = table.column("state");
  long first = 0, last = -1;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const long f = util::parse_long(table.rows[i][cf]);
    if (i == 0 || f < first) first = f;
    if (i == 0 || f > last) last = f;
  }
  if (table.rows.empty()) throw Error(ErrorCode::EmptyInput, "trajectory CSV has no rows");
  traj.first_frame = first;
  traj.length = static_cast<std::size_t>(last - first + 1);
  for (const auto& r : table.rows) {
    const JointId j = joint_from_name(r[cj]);
    auto [it, inserted] = traj.joints.try_emplace(j, traj.length);
    const auto t = static_cast<std::size_t>(util::parse_long(r[cf]) - first);
    it->second.x[t] = util::parse_double(r[cx]);
    it->second.y[t] = util::parse_double(r[cy]);
    it->second.confidence[t] = util::parse_double(r[cc]);
    it->second.state[t] = state_from_name(r[cs]);
  }
  return traj;
}

}  // namespace gaitkit
