#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "gaitkit/core/types.hpp"

namespace gaitkit::synthgait {

struct ConfidenceAssignment {
  long frame = 0;
  JointId joint = JointId::MidHip;
  double confidence = 0.0;
};

/// A keypoint displaced by (dx, dy), e.g. a detector locking onto background.
struct Teleport {
  long frame = 0;
  JointId joint = JointId::MidHip;
  double dx = 0.0;
  double dy = 0.0;
};

/// All frames are absolute frame indices. Application order: noise,
/// teleports, swaps, dropouts, confidence assignments.
struct CorruptionSpec {
  std::map<JointId, std::vector<long>> dropouts;
  double noise_sd_px = 0.0;
  std::vector<JointId> noise_joints{kTrackedJoints.begin(), kTrackedJoints.end()};
  std::vector<long> swaps;  // frames whose lower-limb L/R labels are exchanged
  std::vector<ConfidenceAssignment> confidences;
  std::vector<Teleport> teleports;

  [[nodiscard]] bool empty() const {
    return dropouts.empty() && noise_sd_px == 0.0 && swaps.empty() && confidences.empty() && teleports.empty();
  }

  /// Every frame touched by a discrete corruption (noise excluded).
  [[nodiscard]] std::set<long> touched_frames() const {
    std::set<long> out(swaps.begin(), swaps.end());
    for (const auto& [j, fs] : dropouts) out.insert(fs.begin(), fs.end());
    for (const auto& c : confidences) out.insert(c.frame);
    for (const auto& t : teleports) out.insert(t.frame);
    return out;
  }

  void validate(long first_frame, std::size_t length) const {
    const long last = first_frame + static_cast<long>(length) - 1;
    auto check = [&](long f) {
      if (f < first_frame || f > last) {
        throw Error(ErrorCode::OutOfBounds, "corruption frame " + std::to_string(f) + " outside [" +
                                                std::to_string(first_frame) + ", " + std::to_string(last) + "]");
      }
    };
    for (const auto& f : touched_frames()) check(f);
    if (!(noise_sd_px >= 0.0)) throw Error(ErrorCode::InvalidArgument, "noise SD must be non-negative");
    for (const auto& c : confidences) {
      if (!(c.confidence >= 0.0 && c.confidence <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "assigned confidence outside [0,1]");
      }
    }
  }
};

struct CorruptionRecord {
  std::string kind;  // "noise" | "teleport" | "swap" | "dropout" | "confidence"
  long frame = -1;
  std::optional<JointId> joint;
  double a = 0.0;  // dx, assigned confidence, or noise SD
  double b = 0.0;  // dy, or noise sample count
};

struct CorruptionLog {
  std::uint64_t seed = 0;
  std::vector<CorruptionRecord> records;

  [[nodiscard]] std::set<long> frames_of(std::string_view kind) const {
    std::set<long> out;
    for (const auto& r : records) {
      if (r.kind == kind) out.insert(r.frame);
    }
    return out;
  }
};

struct CorruptionResult {
  TrajectorySet trajectories;
  CorruptionLog log;
};

namespace detail {

inline void exchange_lower_limbs(TrajectorySet& traj, std::size_t t) {
  for (Segment seg : kLimbSegments) {
    auto& l = traj.at(joint_of(Side::Left, seg));
    auto& r = traj.at(joint_of(Side::Right, seg));
    std::swap(l.x[t], r.x[t]);
    std::swap(l.y[t], r.y[t]);
    std::swap(l.confidence[t], r.confidence[t]);
    std::swap(l.state[t], r.state[t]);
  }
}

}  // namespace detail

/// Deterministic for a given seed. Noise is drawn in (joint order of
/// `noise_joints`, frame) order for valid samples only.
inline CorruptionResult corrupt(TrajectorySet traj, const CorruptionSpec& spec, std::uint64_t seed) {
  spec.validate(traj.first_frame, traj.length);
  CorruptionResult out;
  out.log.seed = seed;
  auto idx = [&](long f) { return static_cast<std::size_t>(f - traj.first_frame); };

  if (spec.noise_sd_px > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, spec.noise_sd_px);
    std::size_t drawn = 0;
    for (JointId j : spec.noise_joints) {
      if (!traj.has(j)) continue;
      auto& s = traj.at(j);
      for (std::size_t t = 0; t < traj.length; ++t) {
        if (!s.valid(t)) continue;
        s.x[t] += noise(rng);
        s.y[t] += noise(rng);
        drawn += 2;
      }
    }
    out.log.records.push_back({"noise", -1, std::nullopt, spec.noise_sd_px, static_cast<double>(drawn)});
  }
  for (const auto& tp : spec.teleports) {
    auto& s = traj.at(tp.joint);
    const auto t = idx(tp.frame);
    if (!s.valid(t)) continue;
    s.x[t] += tp.dx;
    s.y[t] += tp.dy;
    out.log.records.push_back({"teleport", tp.frame, tp.joint, tp.dx, tp.dy});
  }
  for (long f : std::set<long>(spec.swaps.begin(), spec.swaps.end())) {
    detail::exchange_lower_limbs(traj, idx(f));
    out.log.records.push_back({"swap", f, std::nullopt, 0.0, 0.0});
  }
  for (const auto& [j, frames] : spec.dropouts) {
    auto& s = traj.at(j);
    for (long f : std::set<long>(frames.begin(), frames.end())) {
      const auto t = idx(f);
      s.x[t] = s.y[t] = s.confidence[t] = 0.0;
      s.state[t] = SampleState::Missing;
      out.log.records.push_back({"dropout", f, j, 0.0, 0.0});
    }
  }
  for (const auto& c : spec.confidences) {
    auto& s = traj.at(c.joint);
    const auto t = idx(c.frame);
    if (!s.valid(t)) continue;
    s.confidence[t] = c.confidence;
    if (c.confidence == 0.0) {
      s.x[t] = s.y[t] = 0.0;
      s.state[t] = SampleState::Missing;
    }
    out.log.records.push_back({"confidence", c.frame, c.joint, c.confidence, 0.0});
  }
  out.trajectories = std::move(traj);
  return out;
}

/// Non-overlapping, non-adjacent swap runs of random length in
/// [min_len, max_len], kept at least `margin` frames from either end.
inline std::vector<long> random_swap_runs(long first_frame, std::size_t length, std::size_t n_runs, std::size_t min_len,
                                          std::size_t max_len, std::size_t margin, std::mt19937_64& rng) {
  if (min_len == 0 || min_len > max_len) throw Error(ErrorCode::InvalidArgument, "bad swap run length range");
  std::vector<bool> taken(length, false);
  std::vector<long> frames;
  std::uniform_int_distribution<std::size_t> len_dist(min_len, max_len);
  for (std::size_t run = 0, attempts = 0; run < n_runs; ++attempts) {
    if (attempts > 10000) throw Error(ErrorCode::InvalidArgument, "cannot place the requested swap runs");
    const std::size_t len = len_dist(rng);
    if (length < 2 * margin + len) continue;
    std::uniform_int_distribution<std::size_t> start_dist(margin, length - margin - len);
    const std::size_t s = start_dist(rng);
    bool clash = false;
    for (std::size_t t = s == 0 ? 0 : s - 1; t <= std::min(length - 1, s + len); ++t) clash = clash || taken[t];
    if (clash) continue;
    for (std::size_t t = s; t < s + len; ++t) {
      taken[t] = true;
      frames.push_back(first_frame + static_cast<long>(t));
    }
    ++run;
  }
  std::sort(frames.begin(), frames.end());
  return frames;
}

inline nlohmann::json spec_json(const CorruptionSpec& spec) {
  using nlohmann::json;
  json drop = json::object();
  for (const auto& [j, fs] : spec.dropouts) drop[std::string(joint_name(j))] = fs;
  json noise_joints = json::array();
  for (JointId j : spec.noise_joints) noise_joints.push_back(std::string(joint_name(j)));
  json conf = json::array();
  for (const auto& c : spec.confidences) {
    conf.push_back({{"frame", c.frame}, {"joint", std::string(joint_name(c.joint))}, {"confidence", c.confidence}});
  }
  json tele = json::array();
  for (const auto& t : spec.teleports) {
    tele.push_back({{"frame", t.frame}, {"joint", std::string(joint_name(t.joint))}, {"dx", t.dx}, {"dy", t.dy}});
  }
  return {{"dropouts", drop},  {"noise_sd_px", spec.noise_sd_px}, {"noise_joints", noise_joints},
          {"swaps", spec.swaps}, {"confidences", conf},           {"teleports", tele}};
}

inline CorruptionSpec spec_from_json(const nlohmann::json& j) {
  CorruptionSpec spec;
  try {
    if (j.contains("dropouts")) {
      for (const auto& [name, fs] : j.at("dropouts").items()) spec.dropouts[joint_from_name(name)] = fs.get<std::vector<long>>();
    }
    spec.noise_sd_px = j.value("noise_sd_px", 0.0);
    if (j.contains("noise_joints")) {
      spec.noise_joints.clear();
      for (const auto& n : j.at("noise_joints")) spec.noise_joints.push_back(joint_from_name(n.get<std::string>()));
    }
    if (j.contains("swaps")) spec.swaps = j.at("swaps").get<std::vector<long>>();
    if (j.contains("confidences")) {
      for (const auto& c : j.at("confidences")) {
        spec.confidences.push_back(
            {c.at("frame").get<long>(), joint_from_name(c.at("joint").get<std::string>()), c.at("confidence").get<double>()});
      }
    }
    if (j.contains("teleports")) {
      for (const auto& t : j.at("teleports")) {
        spec.teleports.push_back({t.at("frame").get<long>(), joint_from_name(t.at("joint").get<std::string>()),
                                  t.value("dx", 0.0), t.value("dy", 0.0)});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Config, std::string("corruption spec: ") + e.what());
  }
  return spec;
}

inline nlohmann::json log_json(const CorruptionLog& log) {
  nlohmann::json recs = nlohmann::json::array();
  for (const auto& r : log.records) {
    nlohmann::json o = {{"kind", r.kind}};
    if (r.frame >= 0) o["frame"] = r.frame;
    if (r.joint) o["joint"] = std::string(joint_name(*r.joint));
    if (r.kind == "teleport") {
      o["dx"] = r.a;
      o["dy"] = r.b;
    } else if (r.kind == "confidence") {
      o["confidence"] = r.a;
    } else if (r.kind == "noise") {
      o["sd_px"] = r.a;
      o["samples"] = static_cast<std::size_t>(r.b);
    }
    recs.push_back(std::move(o));
  }
  return {{"seed", log.seed}, {"records", recs}};
}

}  // namespace gaitkit::synthgait
