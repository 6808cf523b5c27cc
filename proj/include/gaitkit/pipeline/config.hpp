#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "gaitkit/backend/protocol.hpp"
#include "gaitkit/core/types.hpp"
#include "gaitkit/edgemap/canny.hpp"
#include "gaitkit/refine/config.hpp"
#include "gaitkit/util/fs.hpp"

namespace gaitkit::pipeline {

namespace fs = std::filesystem;

enum class EdgeOrder { ResizeThenCanny, CannyThenResize };

struct EdgeConfig {
  edgemap::CannyParams canny{};
  int width = 512;
  int height = 512;
  EdgeOrder order = EdgeOrder::ResizeThenCanny;
};

struct BackendConfig {
  fs::path executable;
  double timeout_s = 3600.0;
  int max_parallel = 1;
  nlohmann::json params = nlohmann::json::object();
};

struct TruthConfig {
  fs::path poses_dir;
  std::string prefix = "pose";
  std::optional<fs::path> angles_csv;  // computed from the truth poses when absent
};

struct PipelineConfig {
  fs::path frames_dir;
  std::string frame_suffix = ".png";
  fs::path work_dir;
  double sample_rate = kDefaultSampleRate;
  long long seed = 0;
  int steps = 20;
  std::string positive_prompt{backend::kDefaultPositivePrompt};
  std::string negative_prompt{backend::kDefaultNegativePrompt};
  EdgeConfig edges{};
  BackendConfig generate{};
  BackendConfig pose{};
  std::optional<BackendConfig> raw_pose;  // pose backend for the unmodified frames; `pose` when absent
  refine::RefineConfig refine{};
  SequenceMeta meta{};
  std::optional<fs::path> events_file;
  bool selective = false;
  bool baseline = false;  // also estimate poses on the unmodified frames
  std::size_t decimate_k = 1;
  std::size_t workers = 1;
  std::optional<TruthConfig> truth;

  [[nodiscard]] bool needs_baseline() const { return baseline || selective; }
  [[nodiscard]] const BackendConfig& raw_pose_backend() const { return raw_pose ? *raw_pose : pose; }

  void validate() const {
    auto must_exist = [](const fs::path& p, const char* what) {
      if (p.empty() || !fs::exists(p)) throw Error(ErrorCode::Config, std::string(what) + " does not exist: " + p.string());
    };
    must_exist(frames_dir, "frames_dir");
    if (work_dir.empty()) throw Error(ErrorCode::Config, "work_dir is required");
    must_exist(generate.executable, "generate backend");
    must_exist(pose.executable, "pose backend");
    if (raw_pose) must_exist(raw_pose->executable, "raw_pose backend");
    if (events_file) must_exist(*events_file, "events_file");
    if (truth) {
      must_exist(truth->poses_dir, "truth.poses_dir");
      if (truth->angles_csv) must_exist(*truth->angles_csv, "truth.angles_csv");
    }
    if (workers < 1) throw Error(ErrorCode::Config, "workers must be >= 1");
    if (decimate_k < 1) throw Error(ErrorCode::Config, "decimate_k must be >= 1");
    if (!(sample_rate > 0.0)) throw Error(ErrorCode::Config, "sample_rate must be positive");
    if (edges.width <= 0 || edges.height <= 0) throw Error(ErrorCode::Config, "edge map size must be positive");
    if (positive_prompt.empty() || negative_prompt.empty()) throw Error(ErrorCode::Config, "prompts must be non-empty");
    edges.canny.validate();
    refine.validate(sample_rate);
  }
};

// ---- JSON ------------------------------------------------------------------

inline nlohmann::json refine_json(const refine::RefineConfig& r) {
  return {{"confidence_threshold", r.confidence_threshold},
          {"butterworth_order", r.butterworth_order},
          {"cutoff_hz", r.cutoff_hz},
          {"zero_phase", r.zero_phase},
          {"max_interp_gap", r.max_interp_gap},
          {"gate_mode", r.gate_mode == refine::GateMode::PerJoint ? "per_joint" : "per_frame"},
          {"filter_angles", r.filter_angles},
          {"outlier_px", r.outlier_px},
          {"swap_noise_floor_px", r.swap_noise_floor_px},
          {"arm_cue_window", r.arm_cue_window},
          {"arm_cue_margin", r.arm_cue_margin}};
}

inline refine::RefineConfig refine_from_json(const nlohmann::json& j) {
  refine::RefineConfig r;
  r.confidence_threshold = j.value("confidence_threshold", r.confidence_threshold);
  r.butterworth_order = j.value("butterworth_order", r.butterworth_order);
  r.cutoff_hz = j.value("cutoff_hz", r.cutoff_hz);
  r.zero_phase = j.value("zero_phase", r.zero_phase);
  r.max_interp_gap = j.value("max_interp_gap", r.max_interp_gap);
  const auto gate = j.value("gate_mode", std::string("per_joint"));
  if (gate == "per_joint") {
    r.gate_mode = refine::GateMode::PerJoint;
  } else if (gate == "per_frame") {
    r.gate_mode = refine::GateMode::PerFrame;
  } else {
    throw Error(ErrorCode::Config, "gate_mode must be per_joint or per_frame");
  }
  r.filter_angles = j.value("filter_angles", r.filter_angles);
  r.outlier_px = j.value("outlier_px", r.outlier_px);
  r.swap_noise_floor_px = j.value("swap_noise_floor_px", r.swap_noise_floor_px);
  r.arm_cue_window = j.value("arm_cue_window", r.arm_cue_window);
  r.arm_cue_margin = j.value("arm_cue_margin", r.arm_cue_margin);
  return r;
}

inline nlohmann::json meta_json(const SequenceMeta& m) {
  nlohmann::json j = {{"camera_view", view_name(m.camera_view)},
                      {"prosthetic_side", m.prosthetic_side == Side::Left ? "Left" : "Right"},
                      {"walking_direction", direction_name(m.walking_direction)}};
  if (m.subject_height_cm) j["subject_height_cm"] = *m.subject_height_cm;
  return j;
}

inline SequenceMeta meta_from_json(const nlohmann::json& j) {
  SequenceMeta m;
  m.camera_view = view_from_name(j.value("camera_view", std::string(view_name(m.camera_view))));
  m.prosthetic_side = side_from_name(j.value("prosthetic_side", std::string("Right")));
  m.walking_direction = direction_from_name(j.value("walking_direction", std::string("Auto")));
  if (j.contains("subject_height_cm")) m.subject_height_cm = j.at("subject_height_cm").get<double>();
  return m;
}

namespace detail {

inline fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return (path.is_absolute() ? path : base / path).lexically_normal();
}

inline BackendConfig backend_from_json(const nlohmann::json& j, const fs::path& base) {
  BackendConfig b;
  b.executable = resolve(base, j.at("exe").get<std::string>());
  b.timeout_s = j.value("timeout_s", b.timeout_s);
  b.max_parallel = j.value("max_parallel", b.max_parallel);
  b.params = j.value("params", nlohmann::json::object());
  return b;
}

inline nlohmann::json backend_json(const BackendConfig& b) {
  return {{"exe", b.executable.string()}, {"timeout_s", b.timeout_s}, {"max_parallel", b.max_parallel}, {"params", b.params}};
}

}  // namespace detail

/// Relative paths resolve against `base` (normally the config file's directory).
inline PipelineConfig config_from_json(const nlohmann::json& j, const fs::path& base) {
  PipelineConfig c;
  try {
    c.frames_dir = detail::resolve(base, j.at("frames_dir").get<std::string>());
    c.frame_suffix = j.value("frame_suffix", c.frame_suffix);
    c.work_dir = detail::resolve(base, j.at("work_dir").get<std::string>());
    c.sample_rate = j.value("sample_rate", c.sample_rate);
    c.seed = j.value("seed", c.seed);
    c.steps = j.value("steps", c.steps);
    if (j.contains("prompts")) {
      c.positive_prompt = j["prompts"].value("positive", c.positive_prompt);
      c.negative_prompt = j["prompts"].value("negative", c.negative_prompt);
    }
    if (j.contains("edges")) {
      const auto& e = j["edges"];
      c.edges.canny.low_threshold = e.value("low", c.edges.canny.low_threshold);
      c.edges.canny.high_threshold = e.value("high", c.edges.canny.high_threshold);
      c.edges.canny.sigma = e.value("sigma", c.edges.canny.sigma);
      c.edges.canny.kernel_size = e.value("kernel_size", c.edges.canny.kernel_size);
      c.edges.width = e.value("width", c.edges.width);
      c.edges.height = e.value("height", c.edges.height);
      const auto order = e.value("order", std::string("resize_then_canny"));
      if (order == "resize_then_canny") {
        c.edges.order = EdgeOrder::ResizeThenCanny;
      } else if (order == "canny_then_resize") {
        c.edges.order = EdgeOrder::CannyThenResize;
      } else {
        throw Error(ErrorCode::Config, "edges.order must be resize_then_canny or canny_then_resize");
      }
    }
    c.generate = detail::backend_from_json(j.at("generate"), base);
    c.pose = detail::backend_from_json(j.at("pose"), base);
    if (j.contains("raw_pose")) c.raw_pose = detail::backend_from_json(j["raw_pose"], base);
    if (j.contains("refine")) c.refine = refine_from_json(j["refine"]);
    if (j.contains("meta")) c.meta = meta_from_json(j["meta"]);
    if (j.contains("events_file")) c.events_file = detail::resolve(base, j["events_file"].get<std::string>());
    c.selective = j.value("selective", c.selective);
    c.baseline = j.value("baseline", c.baseline);
    c.decimate_k = j.value("decimate_k", c.decimate_k);
    c.workers = j.value("workers", c.workers);
    if (j.contains("truth")) {
      const auto& t = j["truth"];
      TruthConfig tc;
      tc.poses_dir = detail::resolve(base, t.at("poses_dir").get<std::string>());
      tc.prefix = t.value("prefix", tc.prefix);
      if (t.contains("angles_csv")) tc.angles_csv = detail::resolve(base, t["angles_csv"].get<std::string>());
      c.truth = tc;
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Config, std::string("pipeline config: ") + e.what());
  }
  return c;
}

inline PipelineConfig load_config(const fs::path& file) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(util::read_file(file));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Config, "cannot parse " + file.string() + ": " + e.what());
  }
  return config_from_json(j, fs::absolute(file).parent_path());
}

inline nlohmann::json config_json(const PipelineConfig& c) {
  nlohmann::json j = {{"frames_dir", c.frames_dir.string()},
                      {"frame_suffix", c.frame_suffix},
                      {"work_dir", c.work_dir.string()},
                      {"sample_rate", c.sample_rate},
                      {"seed", c.seed},
                      {"steps", c.steps},
                      {"prompts", {{"positive", c.positive_prompt}, {"negative", c.negative_prompt}}},
                      {"edges",
                       {{"low", c.edges.canny.low_threshold},
                        {"high", c.edges.canny.high_threshold},
                        {"sigma", c.edges.canny.sigma},
                        {"kernel_size", c.edges.canny.kernel_size},
                        {"width", c.edges.width},
                        {"height", c.edges.height},
                        {"order", c.edges.order == EdgeOrder::ResizeThenCanny ? "resize_then_canny" : "canny_then_resize"}}},
                      {"generate", detail::backend_json(c.generate)},
                      {"pose", detail::backend_json(c.pose)},
                      {"refine", refine_json(c.refine)},
                      {"meta", meta_json(c.meta)},
                      {"selective", c.selective},
                      {"baseline", c.baseline},
                      {"decimate_k", c.decimate_k},
                      {"workers", c.workers}};
  if (c.raw_pose) j["raw_pose"] = detail::backend_json(*c.raw_pose);
  if (c.events_file) j["events_file"] = c.events_file->string();
  if (c.truth) {
    j["truth"] = {{"poses_dir", c.truth->poses_dir.string()}, {"prefix", c.truth->prefix}};
    if (c.truth->angles_csv) j["truth"]["angles_csv"] = c.truth->angles_csv->string();
  }
  return j;
}

}  // namespace gaitkit::pipeline
