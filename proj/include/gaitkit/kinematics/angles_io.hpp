#pragma once

#include <map>
#include <string>

#include "gaitkit/kinematics/angles.hpp"
#include "gaitkit/util/csv.hpp"

namespace gaitkit::kinematics {

/// CSV columns: frame,side,hip_deg,knee_deg,ankle_deg,hip_valid,knee_valid,ankle_valid.
/// Invalid angles are written as empty cells.
inline std::string format_angles_csv(const JointAngles& angles) {
  std::string out = "frame,side,hip_deg,knee_deg,ankle_deg,hip_valid,knee_valid,ankle_valid\n";
  const std::size_t n = angles.left.size();
  for (std::size_t t = 0; t < n; ++t) {
    for (Side side : {Side::Left, Side::Right}) {
      const auto& s = angles.of(side);
      out += std::to_string(s.first_frame + static_cast<long>(t)) + "," + std::string(side_name(side));
      for (AngleJoint j : kAngleJoints) {
        out += ",";
        if (s.valid_of(j)[t]) out += util::fmt_double(s.of(j)[t]);
      }
      for (AngleJoint j : kAngleJoints) out += s.valid_of(j)[t] ? ",1" : ",0";
      out += "\n";
    }
  }
  return out;
}

/// Reads the CSV written by format_angles_csv. Frames must be contiguous.
inline JointAngles parse_angles_csv(std::string_view text, std::optional<Side> near = std::nullopt) {
  const auto table = util::parse_csv(text);
  const std::size_t c_frame = table.column("frame"), c_side = table.column("side");
  const std::array<std::size_t, 3> c_val = {table.column("hip_deg"), table.column("knee_deg"),
                                            table.column("ankle_deg")};
  const std::array<std::size_t, 3> c_ok = {table.column("hip_valid"), table.column("knee_valid"),
                                           table.column("ankle_valid")};
  std::map<Side, std::map<long, const std::vector<std::string>*>> rows;
  for (const auto& r : table.rows) rows[side_from_name(r[c_side])][util::parse_long(r[c_frame])] = &r;
  if (rows.empty()) throw Error(ErrorCode::MalformedDocument, "angle CSV has no rows");

  JointAngles out;
  long first = 0, last = -1;
  bool init = false;
  for (const auto& [side, by_frame] : rows) {
    if (!init || by_frame.begin()->first < first) first = by_frame.begin()->first;
    if (!init || by_frame.rbegin()->first > last) last = by_frame.rbegin()->first;
    init = true;
  }
  const auto n = static_cast<std::size_t>(last - first + 1);
  for (Side side : {Side::Left, Side::Right}) {
    auto& s = out.of(side);
    s.side = side;
    s.first_frame = first;
    s.near_side = near && *near == side;
    s.resize(n);
    for (const auto& [frame, row] : rows[side]) {
      const auto t = static_cast<std::size_t>(frame - first);
      for (std::size_t j = 0; j < 3; ++j) {
        if ((*row)[c_ok[j]] == "1") {
          s.degrees[j][t] = util::parse_double((*row)[c_val[j]]);
          s.valid[j][t] = true;
        }
      }
    }
  }
  return out;
}

}  // namespace gaitkit::kinematics
