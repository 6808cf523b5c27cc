#pragma once

#include <algorithm>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gaitkit/core/types.hpp"
#include "gaitkit/util/fs.hpp"

namespace gaitkit {

/// How to pick the analyzed subject when a document holds several people.
struct PersonSelection {
  enum class Mode { LargestBox, ByIndex, RequireSingle };
  Mode mode = Mode::LargestBox;
  std::size_t index = 0;

  static PersonSelection largest() { return {}; }
  static PersonSelection by_index(std::size_t i) { return {Mode::ByIndex, i}; }
  static PersonSelection require_single() { return {Mode::RequireSingle, 0}; }
};

namespace detail {

inline std::array<Keypoint2D, kBody25Count> parse_triples(const nlohmann::json& flat) {
  if (!flat.is_array()) throw Error(ErrorCode::MalformedDocument, "pose_keypoints_2d is not an array");
  if (flat.size() != 3 * kBody25Count) {
    throw Error(ErrorCode::WrongTripleCount,
                "expected 75 numbers per person, got " + std::to_string(flat.size()));
  }
  std::array<Keypoint2D, kBody25Count> out{};
  for (std::size_t k = 0; k < kBody25Count; ++k) {
    const auto& jx = flat[3 * k];
    const auto& jy = flat[3 * k + 1];
    const auto& jc = flat[3 * k + 2];
    if (!jx.is_number() || !jy.is_number() || !jc.is_number()) {
      throw Error(ErrorCode::MalformedDocument, "non-numeric keypoint value");
    }
    const double x = jx.get<double>();
    const double y = jy.get<double>();
    const double c = jc.get<double>();
    if (!std::isfinite(x) || !std::isfinite(y) || !(c >= 0.0 && c <= 1.0)) {
      throw Error(ErrorCode::MalformedDocument, "keypoint out of range at slot " + std::to_string(k));
    }
    // Zero confidence means "not detected", whatever the coordinates say.
    out[k] = c > 0.0 ? Keypoint2D{x, y, c, true} : Keypoint2D::invalid();
  }
  return out;
}

inline double box_area(const std::array<Keypoint2D, kBody25Count>& kps) {
  double lo_x = std::numeric_limits<double>::infinity(), lo_y = lo_x;
  double hi_x = -lo_x, hi_y = -lo_x;
  int n = 0;
  for (const auto& k : kps) {
    if (!k.valid) continue;
    lo_x = std::min(lo_x, k.x);
    hi_x = std::max(hi_x, k.x);
    lo_y = std::min(lo_y, k.y);
    hi_y = std::max(hi_y, k.y);
    ++n;
  }
  return n < 2 ? 0.0 : (hi_x - lo_x) * (hi_y - lo_y);
}

}  // namespace detail

/// Parses an OpenPose-style BODY_25 document and returns the analyzed person.
inline FramePose parse_pose_file(std::string_view bytes, long frame_index, ImageSize image_size,
                                 PersonSelection selection = PersonSelection::largest()) {
  if (image_size.width <= 0 || image_size.height <= 0) {
    throw Error(ErrorCode::InvalidArgument, "image size must be positive");
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::MalformedDocument, e.what());
  }
  if (!doc.is_object() || !doc.contains("people") || !doc["people"].is_array()) {
    throw Error(ErrorCode::MalformedDocument, "missing 'people' array");
  }
  const auto& people = doc["people"];
  std::vector<std::array<Keypoint2D, kBody25Count>> persons;
  for (const auto& p : people) {
    if (!p.is_object() || !p.contains("pose_keypoints_2d")) {
      throw Error(ErrorCode::MalformedDocument, "person without pose_keypoints_2d");
    }
    persons.push_back(detail::parse_triples(p["pose_keypoints_2d"]));
  }
  if (persons.empty()) {
    throw Error(ErrorCode::NoPersonDetected, "frame " + std::to_string(frame_index));
  }

  std::size_t chosen = 0;
  switch (selection.mode) {
    case PersonSelection::Mode::RequireSingle:
      if (persons.size() > 1) {
        throw Error(ErrorCode::MultiplePersons, std::to_string(persons.size()) + " people in frame " +
                                                    std::to_string(frame_index));
      }
      break;
    case PersonSelection::Mode::ByIndex:
      if (selection.index >= persons.size()) {
        throw Error(ErrorCode::InvalidArgument, "person index out of range");
      }
      chosen = selection.index;
      break;
    case PersonSelection::Mode::LargestBox: {
      double best = -1.0;
      for (std::size_t i = 0; i < persons.size(); ++i) {
        const double a = detail::box_area(persons[i]);
        if (a > best) {
          best = a;
          chosen = i;
        }
      }
      break;
    }
  }
  FramePose pose;
  pose.frame_index = frame_index;
  pose.keypoints = persons[chosen];
  pose.image_size = image_size;
  return pose;
}

/// Serializes poses (usually one) as a BODY_25 document. Invalid keypoints
/// are written as (0,0,0).
inline std::string serialize_pose_document(std::span<const FramePose> persons) {
  nlohmann::json people = nlohmann::json::array();
  for (const auto& pose : persons) {
    nlohmann::json flat = nlohmann::json::array();
    for (const auto& k : pose.keypoints) {
      if (k.valid) {
        flat.push_back(k.x);
        flat.push_back(k.y);
        flat.push_back(k.confidence);
      } else {
        flat.push_back(0.0);
        flat.push_back(0.0);
        flat.push_back(0.0);
      }
    }
    people.push_back({{"person_id", {-1}}, {"pose_keypoints_2d", std::move(flat)}});
  }
  nlohmann::json doc = {{"version", 1.3}, {"people", std::move(people)}};
  return doc.dump();
}

inline std::string serialize_pose_document(const FramePose& pose) {
  return serialize_pose_document(std::span<const FramePose>(&pose, 1));
}

inline std::string empty_pose_document() {
  return nlohmann::json{{"version", 1.3}, {"people", nlohmann::json::array()}}.dump();
}

/// `<prefix>_000000000012_keypoints.json`
inline std::string pose_filename(std::string_view prefix, long frame_index) {
  return std::string(prefix) + "_" + util::zero_pad(frame_index, 12) + "_keypoints.json";
}

/// Builds per-joint series from consecutive frames. Invalid keypoints become
/// Missing samples.
inline TrajectorySet assemble_trajectories(std::span<const FramePose> frames,
                                           double sample_rate = kDefaultSampleRate) {
  if (frames.empty()) throw Error(ErrorCode::EmptyInput, "no frames to assemble");
  if (!(sample_rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "sample rate must be positive");
  for (std::size_t t = 1; t < frames.size(); ++t) {
    if (frames[t].frame_index != frames[t - 1].frame_index + 1) {
      throw Error(ErrorCode::FrameGap, "frame " + std::to_string(frames[t - 1].frame_index) +
                                           " followed by " + std::to_string(frames[t].frame_index));
    }
  }
  TrajectorySet traj;
  traj.sample_rate = sample_rate;
  traj.first_frame = frames.front().frame_index;
  traj.length = frames.size();
  for (JointId j : kTrackedJoints) {
    JointSeries s(frames.size());
    for (std::size_t t = 0; t < frames.size(); ++t) {
      const auto& k = frames[t].at(j);
      if (!k.valid) continue;
      s.x[t] = k.x;
      s.y[t] = k.y;
      s.confidence[t] = k.confidence;
      s.state[t] = SampleState::Observed;
    }
    traj.joints.emplace(j, std::move(s));
  }
  return traj;
}

/// Inverse of assemble_trajectories for one frame.
inline FramePose frame_from_trajectories(const TrajectorySet& traj, std::size_t t, ImageSize size) {
  FramePose pose;
  pose.frame_index = traj.frame_at(t);
  pose.image_size = size;
  for (const auto& [j, s] : traj.joints) {
    if (s.valid(t)) pose.at(j) = Keypoint2D{s.x[t], s.y[t], s.confidence[t], true};
  }
  return pose;
}

/// Reads `first .. first+count-1` from a pose directory. Frames whose file is
/// missing, unreadable or empty of people yield an all-invalid pose, so a
/// failed frame flows downstream as missing data.
inline std::vector<FramePose> load_pose_directory(const std::filesystem::path& dir, std::string_view prefix,
                                                  long first, std::size_t count, ImageSize size,
                                                  PersonSelection selection = PersonSelection::largest(),
                                                  std::vector<long>* failed = nullptr) {
  std::vector<FramePose> frames;
  frames.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const long f = first + static_cast<long>(i);
    const auto path = dir / pose_filename(prefix, f);
    FramePose pose;
    pose.frame_index = f;
    pose.image_size = size;
    try {
      if (std::filesystem::exists(path)) {
        pose = parse_pose_file(util::read_file(path), f, size, selection);
      } else if (failed) {
        failed->push_back(f);
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoPersonDetected) throw;
    }
    frames.push_back(pose);
  }
  return frames;
}

}  // namespace gaitkit
