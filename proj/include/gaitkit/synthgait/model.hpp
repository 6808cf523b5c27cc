#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include <json.hpp>

#include "gaitkit/core/types.hpp"
#include "gaitkit/kinematics/angles.hpp"

namespace gaitkit::synthgait {

struct Harmonic {
  double amplitude_deg = 0.0;
  double phase_rad = 0.0;
};

/// offset + sum_h amplitude_h cos(2 pi h phase + phase_h), phase in cycles.
struct Waveform {
  double offset_deg = 0.0;
  std::array<Harmonic, 3> harmonics{};

  [[nodiscard]] double operator()(double phase) const {
    double v = offset_deg;
    for (std::size_t h = 0; h < harmonics.size(); ++h) {
      v += harmonics[h].amplitude_deg *
           std::cos(2.0 * std::numbers::pi * static_cast<double>(h + 1) * phase + harmonics[h].phase_rad);
    }
    return v;
  }
};

/// Per-side deviation from the template waveforms, for emulating an
/// asymmetric prosthetic gait.
struct SideAsymmetry {
  double amplitude_scale = 1.0;
  double phase_offset = 0.0;  // fraction of a cycle; positive delays the curve
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Fixture coefficients resembling typical sagittal walking curves.
inline Waveform default_hip() { return {13.35, {{{20.68, 0.0219}, {3.482, 2.4469}, {0.972, 2.2232}}}}; }
inline Waveform default_knee() { return {21.62, {{{18.057, 1.6943}, {16.753, -2.6855}, {2.524, -1.2188}}}}; }
inline Waveform default_ankle() { return {-0.38, {{{3.621, -1.898}, {8.801, 1.3751}, {3.518, -2.5947}}}}; }

struct GaitModel {
  double cadence_hz = 1.0;  // gait cycles per second
  Waveform hip = default_hip();
  Waveform knee = default_knee();
  Waveform ankle = default_ankle();
  double thigh_px = 150.0;
  double shank_px = 145.0;
  double foot_px = 55.0;
  double torso_px = 170.0;
  double arm_px = 140.0;
  double arm_swing_gain = 0.8;          // arm angle = -gain * ipsilateral hip angle
  double hip_offset_px = 3.0;           // half distance between projected hips
  double pelvis_speed_px_per_frame = 3.0;
  Point pelvis_start{250.0, 300.0};
  ImageSize image_size{1280, 720};
  int anterior_sign = +1;               // walking toward +x
  double right_heel_phase = 0.5;        // right heel strike lag behind left, in cycles
  SideAsymmetry left{};
  SideAsymmetry right{};

  void validate() const {
    if (!(cadence_hz > 0.0)) throw Error(ErrorCode::InvalidArgument, "cadence must be positive");
    for (double len : {thigh_px, shank_px, foot_px, torso_px, arm_px}) {
      if (!(len > 0.0)) throw Error(ErrorCode::InvalidArgument, "segment lengths must be positive");
    }
    if (anterior_sign != 1 && anterior_sign != -1) throw Error(ErrorCode::InvalidArgument, "anterior sign must be +1 or -1");
    if (image_size.width <= 0 || image_size.height <= 0) throw Error(ErrorCode::InvalidArgument, "bad image size");
  }

  [[nodiscard]] const SideAsymmetry& asymmetry(Side s) const { return s == Side::Left ? left : right; }
  [[nodiscard]] double heel_phase(Side s) const { return s == Side::Left ? 0.0 : right_heel_phase; }

  /// Angles in degrees at time t (seconds) for one side.
  [[nodiscard]] std::array<double, 3> angles_at(Side s, double t) const {
    const auto& a = asymmetry(s);
    const double phase = cadence_hz * t - heel_phase(s) - a.phase_offset;
    return {a.amplitude_scale * hip(phase), a.amplitude_scale * knee(phase), a.amplitude_scale * ankle(phase)};
  }

  /// Zero-amplitude, stationary model.
  static GaitModel standing() {
    GaitModel m;
    m.hip = {};
    m.knee = {};
    m.ankle = {};
    m.pelvis_speed_px_per_frame = 0.0;
    return m;
  }
};

struct SynthOutput {
  TrajectorySet trajectories;
  kinematics::JointAngles angles;
  std::vector<GaitEvent> events;
};

namespace detail {

inline Point rotate(Point v, double rad) {
  return {v.x * std::cos(rad) - v.y * std::sin(rad), v.x * std::sin(rad) + v.y * std::cos(rad)};
}

inline Point add(Point a, Point b, double scale = 1.0) { return {a.x + scale * b.x, a.y + scale * b.y}; }

}  // namespace detail

/// Builds keypoints by chaining segments down from the hips using exactly the
/// sign conventions of the kinematics module, so recovering angles from the
/// returned trajectories reproduces the returned truth. Heel strikes are
/// emitted at every cycle boundary of each side's clock.
inline SynthOutput forward_kinematics(const GaitModel& model, std::size_t n_frames, double sample_rate,
                                      double confidence = 1.0) {
  model.validate();
  if (n_frames == 0) throw Error(ErrorCode::InvalidArgument, "need at least one frame");
  if (!(sample_rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "sample rate must be positive");
  constexpr double kDeg = std::numbers::pi / 180.0;
  const double a = model.anterior_sign;

  SynthOutput out;
  auto& traj = out.trajectories;
  traj.sample_rate = sample_rate;
  traj.first_frame = 0;
  traj.length = n_frames;
  for (JointId j : kTrackedJoints) traj.joints.emplace(j, JointSeries(n_frames));

  out.angles.anterior = {model.anterior_sign};
  for (Side s : {Side::Left, Side::Right}) {
    auto& series = out.angles.of(s);
    series.side = s;
    series.first_frame = 0;
    series.resize(n_frames);
  }

  auto put = [&](JointId j, std::size_t t, Point p) {
    if (!(p.x >= 0.0 && p.y >= 0.0 && p.x < model.image_size.width && p.y < model.image_size.height)) {
      throw Error(ErrorCode::OutOfBounds, std::string(joint_name(j)) + " leaves the image at frame " + std::to_string(t));
    }
    auto& s = traj.at(j);
    s.x[t] = p.x;
    s.y[t] = p.y;
    s.confidence[t] = confidence;
    s.state[t] = SampleState::Observed;
  };

  for (std::size_t t = 0; t < n_frames; ++t) {
    const double time = static_cast<double>(t) / sample_rate;
    const Point pelvis{model.pelvis_start.x + a * model.pelvis_speed_px_per_frame * static_cast<double>(t),
                       model.pelvis_start.y};
    put(JointId::MidHip, t, pelvis);
    const Point neck{pelvis.x, pelvis.y - model.torso_px};
    put(JointId::Neck, t, neck);

    for (Side s : {Side::Left, Side::Right}) {
      const auto ang = model.angles_at(s, time);
      auto& truth = out.angles.of(s);
      for (std::size_t k = 0; k < 3; ++k) {
        truth.degrees[k][t] = ang[k];
        truth.valid[k][t] = true;
      }
      const double side_sign = s == Side::Left ? 1.0 : -1.0;
      const Point hip{pelvis.x + side_sign * model.hip_offset_px, pelvis.y};
      const Point thigh_dir{a * std::sin(ang[0] * kDeg), std::cos(ang[0] * kDeg)};
      const Point knee = detail::add(hip, thigh_dir, model.thigh_px);
      const Point shank_dir = detail::rotate(thigh_dir, a * ang[1] * kDeg);
      const Point ankle = detail::add(knee, shank_dir, model.shank_px);
      const Point perp{a * shank_dir.y, -a * shank_dir.x};
      const Point foot_dir = detail::rotate(perp, -a * ang[2] * kDeg);
      const Point toe = detail::add(ankle, foot_dir, model.foot_px);
      put(joint_of(s, Segment::Hip), t, hip);
      put(joint_of(s, Segment::Knee), t, knee);
      put(joint_of(s, Segment::Ankle), t, ankle);
      put(joint_of(s, Segment::Toe), t, toe);

      const double arm = -model.arm_swing_gain * ang[0] * kDeg;
      const Point shoulder{neck.x, neck.y + 15.0};
      put(wrist_of(s), t, detail::add(shoulder, {a * std::sin(arm), std::cos(arm)}, model.arm_px));
    }
  }

  // Heel strikes: frames nearest to each integer crossing of a side's clock.
  const double last_time = static_cast<double>(n_frames - 1) / sample_rate;
  for (Side s : {Side::Left, Side::Right}) {
    const double first_cycle = std::ceil(-model.heel_phase(s) - 1e-9);
    for (double c = first_cycle;; c += 1.0) {
      const double time = (c + model.heel_phase(s)) / model.cadence_hz;
      if (time > last_time + 1e-9) break;
      if (time < -1e-9) continue;
      out.events.push_back({std::lround(time * sample_rate), s, EventKind::HeelStrike});
    }
  }
  std::stable_sort(out.events.begin(), out.events.end(),
                   [](const GaitEvent& x, const GaitEvent& y) { return x.frame_index < y.frame_index; });
  return out;
}

inline nlohmann::json waveform_json(const Waveform& w) {
  nlohmann::json h = nlohmann::json::array();
  for (const auto& hm : w.harmonics) h.push_back({{"amplitude_deg", hm.amplitude_deg}, {"phase_rad", hm.phase_rad}});
  return {{"offset_deg", w.offset_deg}, {"harmonics", h}};
}

inline Waveform waveform_from_json(const nlohmann::json& j) {
  Waveform w;
  w.offset_deg = j.value("offset_deg", 0.0);
  if (j.contains("harmonics")) {
    const auto& h = j.at("harmonics");
    if (!h.is_array() || h.size() > 3) throw Error(ErrorCode::Config, "at most 3 harmonics per waveform");
    for (std::size_t i = 0; i < h.size(); ++i) {
      w.harmonics[i] = {h[i].value("amplitude_deg", 0.0), h[i].value("phase_rad", 0.0)};
    }
  }
  return w;
}

inline nlohmann::json model_json(const GaitModel& m) {
  auto asym = [](const SideAsymmetry& s) {
    return nlohmann::json{{"amplitude_scale", s.amplitude_scale}, {"phase_offset", s.phase_offset}};
  };
  return {{"cadence_hz", m.cadence_hz},
          {"hip", waveform_json(m.hip)},
          {"knee", waveform_json(m.knee)},
          {"ankle", waveform_json(m.ankle)},
          {"thigh_px", m.thigh_px},
          {"shank_px", m.shank_px},
          {"foot_px", m.foot_px},
          {"torso_px", m.torso_px},
          {"arm_px", m.arm_px},
          {"arm_swing_gain", m.arm_swing_gain},
          {"hip_offset_px", m.hip_offset_px},
          {"pelvis_speed_px_per_frame", m.pelvis_speed_px_per_frame},
          {"pelvis_start", {m.pelvis_start.x, m.pelvis_start.y}},
          {"image_size", {m.image_size.width, m.image_size.height}},
          {"anterior_sign", m.anterior_sign},
          {"right_heel_phase", m.right_heel_phase},
          {"left", asym(m.left)},
          {"right", asym(m.right)}};
}

inline GaitModel model_from_json(const nlohmann::json& j) {
  GaitModel m;
  try {
    m.cadence_hz = j.value("cadence_hz", m.cadence_hz);
    if (j.contains("hip")) m.hip = waveform_from_json(j.at("hip"));
    if (j.contains("knee")) m.knee = waveform_from_json(j.at("knee"));
    if (j.contains("ankle")) m.ankle = waveform_from_json(j.at("ankle"));
    m.thigh_px = j.value("thigh_px", m.thigh_px);
    m.shank_px = j.value("shank_px", m.shank_px);
    m.foot_px = j.value("foot_px", m.foot_px);
    m.torso_px = j.value("torso_px", m.torso_px);
    m.arm_px = j.value("arm_px", m.arm_px);
    m.arm_swing_gain = j.value("arm_swing_gain", m.arm_swing_gain);
    m.hip_offset_px = j.value("hip_offset_px", m.hip_offset_px);
    m.pelvis_speed_px_per_frame = j.value("pelvis_speed_px_per_frame", m.pelvis_speed_px_per_frame);
    if (j.contains("pelvis_start")) m.pelvis_start = {j["pelvis_start"].at(0).get<double>(), j["pelvis_start"].at(1).get<double>()};
    if (j.contains("image_size")) m.image_size = {j["image_size"].at(0).get<int>(), j["image_size"].at(1).get<int>()};
    m.anterior_sign = j.value("anterior_sign", m.anterior_sign);
    m.right_heel_phase = j.value("right_heel_phase", m.right_heel_phase);
    for (auto [key, dst] : {std::pair{"left", &m.left}, std::pair{"right", &m.right}}) {
      if (j.contains(key)) {
        dst->amplitude_scale = j[key].value("amplitude_scale", 1.0);
        dst->phase_offset = j[key].value("phase_offset", 0.0);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Config, std::string("gait model: ") + e.what());
  }
  m.validate();
  return m;
}

}  // namespace gaitkit::synthgait
