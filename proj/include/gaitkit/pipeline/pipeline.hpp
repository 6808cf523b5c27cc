#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "gaitkit/backend/protocol.hpp"
#include "gaitkit/backend/runner.hpp"
#include "gaitkit/core/pose_io.hpp"
#include "gaitkit/core/trajectory_io.hpp"
#include "gaitkit/edgemap/canny.hpp"
#include "gaitkit/edgemap/png_io.hpp"
#include "gaitkit/gaitcycle/events.hpp"
#include "gaitkit/gaitcycle/output.hpp"
#include "gaitkit/kinematics/angles_io.hpp"
#include "gaitkit/metrics/report.hpp"
#include "gaitkit/pipeline/config.hpp"
#include "gaitkit/refine/butterworth.hpp"
#include "gaitkit/refine/gating.hpp"
#include "gaitkit/refine/selection.hpp"
#include "gaitkit/refine/spline.hpp"
#include "gaitkit/refine/swaps.hpp"
#include "gaitkit/util/parallel.hpp"
#include "gaitkit/version.hpp"

namespace gaitkit::pipeline {

inline constexpr std::string_view kPosePrefix = "frame";
inline constexpr std::string_view kStageMarker = ".stage";

// ---- Frame inventory --------------------------------------------------------

struct FrameInventory {
  std::vector<long> frames;  // contiguous ordinals
  std::vector<fs::path> paths;
  ImageSize size{};

  [[nodiscard]] long first() const { return frames.front(); }
  [[nodiscard]] std::size_t count() const { return frames.size(); }
};

inline FrameInventory inventory_frames(const fs::path& dir, std::string_view suffix) {
  std::vector<std::pair<long, fs::path>> found;
  for (const auto& p : util::list_files(dir, suffix)) {
    const auto ord = util::ordinal_from_name(p);
    if (!ord) throw Error(ErrorCode::Config, "frame file without an ordinal: " + p.filename().string());
    found.emplace_back(*ord, p);
  }
  if (found.empty()) throw Error(ErrorCode::EmptyInput, "no '" + std::string(suffix) + "' frames in " + dir.string());
  std::sort(found.begin(), found.end());
  FrameInventory inv;
  for (const auto& [f, p] : found) {
    if (!inv.frames.empty() && f != inv.frames.back() + 1) {
      throw Error(ErrorCode::FrameGap, "frame " + std::to_string(inv.frames.back()) + " followed by " + std::to_string(f));
    }
    inv.frames.push_back(f);
    inv.paths.push_back(p);
  }
  inv.size = edgemap::png_size(inv.paths.front());
  return inv;
}

inline std::string frame_stem(long f) { return "frame_" + util::zero_pad(f, 12); }

// ---- Stage building blocks ----------------------------------------------------

/// Edge map for one RGB frame, at the configured conditioning size.
inline edgemap::GrayImage edge_image(const edgemap::RgbImage& rgb, const EdgeConfig& cfg) {
  const auto gray = edgemap::to_grayscale(rgb);
  if (cfg.order == EdgeOrder::ResizeThenCanny) {
    return edgemap::canny(edgemap::resize_bilinear(gray, cfg.width, cfg.height), cfg.canny).to_image();
  }
  auto resized = edgemap::resize_bilinear(edgemap::canny(gray, cfg.canny).to_image(), cfg.width, cfg.height);
  for (auto& v : resized.data()) v = v >= 128 ? 255 : 0;
  return resized;
}

struct RefineOutcome {
  TrajectorySet trajectories;
  nlohmann::json log;
};

/// gate -> swap correction -> gap interpolation -> low-pass filter.
inline RefineOutcome refine_poses(std::span<const FramePose> frames, const refine::RefineConfig& cfg, double sample_rate) {
  cfg.validate(sample_rate);
  auto traj = assemble_trajectories(frames, sample_rate);
  traj = refine::gate_by_confidence(std::move(traj), cfg.confidence_threshold, cfg.gate_mode);
  auto swaps = refine::correct_swaps(traj, cfg);
  auto interp = refine::interpolate_gaps(std::move(swaps.trajectories), cfg.max_interp_gap);
  auto filtered = refine::filter_trajectories(std::move(interp.trajectories), cfg);

  nlohmann::json empty = nlohmann::json::array(), unfiltered = nlohmann::json::array();
  for (JointId j : interp.empty_series) empty.push_back(std::string(joint_name(j)));
  for (const auto& [j, f] : filtered.unfiltered_runs) {
    unfiltered.push_back({{"joint", std::string(joint_name(j))}, {"first_frame", f}});
  }
  static constexpr const char* kOrient[] = {"seeded", "flipped_by_arm_cue", "ambiguous"};
  nlohmann::json log = {{"swapped_frames", swaps.swapped_frames},
                        {"review_frames", swaps.review_frames},
                        {"swap_orientation", kOrient[static_cast<int>(swaps.orientation)]},
                        {"arm_leg_correlation", swaps.arm_correlation},
                        {"empty_series", empty},
                        {"unfiltered_runs", unfiltered}};
  if (swaps.seed_frame) log["swap_seed_frame"] = *swaps.seed_frame;
  return {std::move(filtered.trajectories), std::move(log)};
}

/// Low-pass filters each contiguous valid run of every angle series.
inline void filter_angles(kinematics::JointAngles& angles, const refine::RefineConfig& cfg, double sample_rate) {
  const auto sections = refine::design_butterworth_lowpass(cfg.butterworth_order, cfg.cutoff_hz, sample_rate);
  const std::size_t min_len = cfg.zero_phase ? refine::filtfilt_padding(cfg.butterworth_order) + 1 : 1;
  for (Side side : {Side::Left, Side::Right}) {
    auto& s = angles.of(side);
    for (std::size_t j = 0; j < 3; ++j) {
      auto& d = s.degrees[j];
      const auto& ok = s.valid[j];
      for (std::size_t t = 0; t < d.size();) {
        if (!ok[t]) {
          ++t;
          continue;
        }
        std::size_t end = t;
        while (end < d.size() && ok[end]) ++end;
        if (end - t >= min_len) {
          std::span<const double> run(d.data() + t, end - t);
          auto out = cfg.zero_phase ? refine::sosfiltfilt(sections, run, cfg.butterworth_order) : refine::sosfilt(sections, run);
          std::copy(out.begin(), out.end(), d.begin() + static_cast<std::ptrdiff_t>(t));
        }
        t = end;
      }
    }
  }
}

struct EnsembleOutcome {
  std::vector<gaitcycle::CycleEnsemble> ensembles;
  nlohmann::json log = nlohmann::json::object();
};

inline EnsembleOutcome build_ensembles(const kinematics::JointAngles& angles, const std::vector<GaitEvent>& events) {
  EnsembleOutcome out;
  for (Side side : {Side::Left, Side::Right}) {
    nlohmann::json sl = {{"accepted", 0}, {"rejected", nlohmann::json::array()}};
    try {
      const auto cycles = gaitcycle::segment_cycles(events, side);
      const auto analysis = gaitcycle::normalize_all(angles.of(side), cycles);
      sl["accepted"] = analysis.accepted.size();
      for (std::size_t i = 0; i < analysis.rejected.size(); ++i) {
        sl["rejected"].push_back({{"start", analysis.rejected[i].first},
                                  {"end", analysis.rejected[i].second},
                                  {"reason", analysis.reasons[i]}});
      }
      out.ensembles.push_back(gaitcycle::ensemble_stats(analysis.accepted));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InsufficientEvents && e.code() != ErrorCode::NoCycles) throw;
      sl["error"] = std::string(to_string(e.code()));
    }
    out.log[std::string(side_name(side))] = sl;
  }
  return out;
}

inline std::vector<FramePose> load_poses(const fs::path& dir, const FrameInventory& inv, std::string_view prefix = kPosePrefix,
                                         std::vector<long>* missing = nullptr) {
  return load_pose_directory(dir, prefix, inv.first(), inv.count(), inv.size, PersonSelection::largest(), missing);
}

// ---- Evaluation from persisted outputs --------------------------------------

/// Rebuilds the error report from a run directory's persisted stage outputs.
/// Methods whose outputs are absent are left out.
inline metrics::ErrorReport evaluate_run(const fs::path& run_dir, const PipelineConfig& cfg) {
  using metrics::Method;
  const auto inv = inventory_frames(cfg.frames_dir, cfg.frame_suffix);
  metrics::ErrorReport report;
  report.n_frames = inv.count();
  const double thr = cfg.refine.confidence_threshold;

  const std::map<Method, std::string> pose_dirs = {{Method::ZeroShot, "poses_raw"}, {Method::RawPose, "baseline_poses"}};
  for (const auto& [m, dir] : pose_dirs) {
    if (!fs::exists(run_dir / dir / pose_filename(kPosePrefix, inv.first()))) continue;
    report.merge_failures(m, metrics::failure_frame_stats({{cfg.meta.camera_view, load_poses(run_dir / dir, inv)}}, thr));
  }
  if (!cfg.truth) return report;

  const auto truth_traj = assemble_trajectories(load_poses(cfg.truth->poses_dir, inv, cfg.truth->prefix), cfg.sample_rate);
  const std::map<Method, std::pair<std::string, std::string>> files = {
      {Method::ZeroShot, {"poses_refined/trajectories.csv", "cycles/ensemble.csv"}},
      {Method::RawPose, {"poses_refined/raw_pose_trajectories.csv", "cycles/raw_pose_ensemble.csv"}}};
  std::vector<gaitcycle::CycleEnsemble> truth_ens;
  if (fs::exists(run_dir / "cycles/truth_ensemble.csv")) {
    truth_ens = gaitcycle::parse_ensemble_csv(util::read_file(run_dir / "cycles/truth_ensemble.csv"));
  }
  for (const auto& [m, paths] : files) {
    if (!fs::exists(run_dir / paths.first)) continue;
    const auto pred = parse_trajectories_csv(util::read_file(run_dir / paths.first));
    for (Side side : {Side::Left, Side::Right}) {
      auto& role = report.errors[m][metrics::role_of(side, cfg.meta.prosthetic_side)];
      for (Segment seg : kLimbSegments) {
        const JointId j = joint_of(side, seg);
        const auto d = metrics::coordinate_errors(pred, truth_traj, std::span<const JointId>(&j, 1));
        auto& dst = role.coordinates_px[seg];
        dst.insert(dst.end(), d.begin(), d.end());
      }
    }
    if (!fs::exists(run_dir / paths.second) || truth_ens.empty()) continue;
    for (const auto& e : gaitcycle::parse_ensemble_csv(util::read_file(run_dir / paths.second))) {
      auto t = std::find_if(truth_ens.begin(), truth_ens.end(), [&](const auto& x) { return x.side == e.side; });
      if (t == truth_ens.end()) continue;
      auto& role = report.errors[m][metrics::role_of(e.side, cfg.meta.prosthetic_side)];
      for (auto j : kinematics::kAngleJoints) {
        const auto d = metrics::angle_errors(e, *t, j);
        auto& dst = role.angles_deg[j];
        dst.insert(dst.end(), d.begin(), d.end());
      }
    }
  }
  if (cfg.meta.subject_height_cm) {
    if (const auto px = metrics::apparent_height_px(truth_traj)) {
      report.scale = metrics::estimate_scale(*cfg.meta.subject_height_cm, *px);
    }
  }
  return report;
}

// ---- Orchestration ---------------------------------------------------------

struct StageRecord {
  std::string name;
  bool executed = false;
  double seconds = 0.0;
  std::string hash;
  std::string note;
};

struct RunResult {
  fs::path run_dir;
  std::vector<StageRecord> stages;
  std::size_t backend_calls = 0;
  std::vector<long> generation_frames;
  std::map<std::string, std::vector<long>> failed_frames;  // backend job -> frames without output
  std::optional<metrics::ErrorReport> report;

  [[nodiscard]] const StageRecord* stage(std::string_view name) const {
    for (const auto& s : stages) {
      if (s.name == name) return &s;
    }
    return nullptr;
  }
};

namespace detail {

inline nlohmann::json frame_listing(const FrameInventory& inv) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& p : inv.paths) j.push_back({p.filename().string(), fs::file_size(p)});
  return j;
}

inline nlohmann::json backend_slice(const BackendConfig& b) {
  return {{"exe", b.executable.string()}, {"max_parallel", b.max_parallel}, {"params", b.params}};
}

inline std::vector<long> read_frame_list(const nlohmann::json& j, const char* key) {
  return j.contains(key) ? j.at(key).get<std::vector<long>>() : std::vector<long>{};
}

class Runner {
 public:
  Runner(const PipelineConfig& cfg, RunResult& result)
      : cfg_(cfg), result_(result), run_(fs::absolute(cfg.work_dir).lexically_normal()) {}

  /// Runs `body` in a fresh `<run>/<name>` unless its marker matches the
  /// stage hash and no dependency was re-executed in this run.
  void stage(const std::string& name, const std::vector<std::string>& deps, const nlohmann::json& slice,
             const std::function<std::string(const fs::path&)>& body) {
    nlohmann::json key = {{"stage", name}, {"config", slice}, {"deps", nlohmann::json::object()}};
    bool dep_ran = false;
    for (const auto& d : deps) {
      key["deps"][d] = hashes_.at(d);
      dep_ran = dep_ran || executed_.at(d);
    }
    const std::string hash = util::hex64(util::fnv1a(key.dump()));
    const fs::path dir = run_ / name;
    const fs::path marker = dir / kStageMarker;
    StageRecord rec{name, false, 0.0, hash, ""};
    const bool cached = !dep_ran && fs::exists(marker) && util::read_file(marker) == hash + "\n";
    if (!cached) {
      const auto t0 = std::chrono::steady_clock::now();
      fs::remove_all(dir);
      fs::create_directories(dir);
      rec.note = body(dir);
      util::write_file(marker, hash + "\n");
      rec.executed = true;
      rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    hashes_[name] = hash;
    executed_[name] = rec.executed;
    result_.stages.push_back(rec);
  }

  /// Writes the manifest under logs/ and runs the backend. Frames whose
  /// output is missing are returned; a job with no output at all fails the run.
  std::vector<long> call_backend(backend::BackendJob& job, const BackendConfig& b) {
    job.max_parallel = b.max_parallel;
    job.params = b.params;
    const auto logs = run_ / "logs";
    const auto manifest = backend::write_manifest(job, logs);
    ++result_.backend_calls;
    backend::run_backend(job, b.executable, manifest, b.timeout_s, logs / (job.job_id + ".log"));
    timings_[job.job_id] = {{"wall_seconds", job.wall_seconds},
                            {"exit_code", job.exit_code},
                            {"status", backend::status_name(job.status())},
                            {"seconds_per_request", job.seconds_per_request.empty()
                                                        ? 0.0
                                                        : job.wall_seconds / static_cast<double>(job.size())}};
    if (!job.missing_outputs.empty()) result_.failed_frames[job.job_id] = job.missing_outputs;
    if (job.missing_outputs.size() == job.size()) {
      throw Error(ErrorCode::BackendFailed, "backend " + b.executable.string() + " produced no output (exit " +
                                                std::to_string(job.exit_code) + "): " + job.diagnostics);
    }
    return job.missing_outputs;
  }

  [[nodiscard]] const fs::path& run_dir() const { return run_; }
  [[nodiscard]] const nlohmann::json& timings() const { return timings_; }

 private:
  const PipelineConfig& cfg_;
  RunResult& result_;
  fs::path run_;
  std::map<std::string, std::string> hashes_;
  std::map<std::string, bool> executed_;
  nlohmann::json timings_ = nlohmann::json::object();
};

inline void write_run_manifest(const fs::path& run, const PipelineConfig& cfg, const RunResult& r,
                               const nlohmann::json& timings, const std::string& error) {
  nlohmann::json stages = nlohmann::json::array();
  for (const auto& s : r.stages) {
    stages.push_back({{"name", s.name}, {"executed", s.executed}, {"seconds", s.seconds}, {"hash", s.hash}, {"note", s.note}});
  }
  auto cfg_j = config_json(cfg);
  cfg_j.erase("work_dir");
  nlohmann::json j = {{"toolkit_version", kVersion},
                      {"config_hash", util::hex64(util::fnv1a(cfg_j.dump()))},
                      {"config", config_json(cfg)},
                      {"prompts", {{"positive", cfg.positive_prompt}, {"negative", cfg.negative_prompt}}},
                      {"stages", stages},
                      {"backend_calls", r.backend_calls},
                      {"backend_jobs", timings},
                      {"failed_frames", r.failed_frames},
                      {"status", error.empty() ? "ok" : "failed"}};
  if (!error.empty()) j["error"] = error;
  util::write_file(run / "run_manifest.json", j.dump(2) + "\n");
}

}  // namespace detail

/// Runs every stage in order, reusing stages whose inputs are unchanged.
/// Backend failures throw BackendFailed/BackendTimeout; other stage failures
/// throw their own codes. The run manifest is written in every case.
inline RunResult run_full(const PipelineConfig& cfg) {
  cfg.validate();
  RunResult result;
  detail::Runner runner(cfg, result);
  result.run_dir = runner.run_dir();
  const fs::path run = runner.run_dir();
  fs::create_directories(run / "logs");
  const auto inv = inventory_frames(cfg.frames_dir, cfg.frame_suffix);
  const auto listing = detail::frame_listing(inv);
  std::string error;

  try {
    runner.stage("edges", {}, {{"frames", listing}, {"edges", config_json(cfg)["edges"]}}, [&](const fs::path& dir) {
      util::parallel_for(inv.count(), cfg.workers, [&](std::size_t i) {
        const auto img = edge_image(edgemap::read_png<3>(inv.paths[i]), cfg.edges);
        edgemap::write_png(dir / (frame_stem(inv.frames[i]) + ".png"), img);
      });
      return std::to_string(inv.count()) + " edge maps";
    });

    runner.stage("baseline_poses", {}, {{"frames", listing}, {"enabled", cfg.needs_baseline()},
                                        {"backend", detail::backend_slice(cfg.raw_pose_backend())}},
                 [&](const fs::path& dir) -> std::string {
                   if (!cfg.needs_baseline()) return "disabled";
                   backend::BackendJob job;
                   job.job_id = "pose_baseline";
                   job.kind = backend::JobKind::EstimatePose;
                   for (std::size_t i = 0; i < inv.count(); ++i) {
                     job.pose.push_back({inv.frames[i], inv.paths[i], dir / pose_filename(kPosePrefix, inv.frames[i])});
                   }
                   const auto missing = runner.call_backend(job, cfg.raw_pose_backend());
                   return std::to_string(missing.size()) + " frames without output";
                 });

    runner.stage("selection", {"baseline_poses"},
                 {{"refine", cfg.selective ? refine_json(cfg.refine) : nlohmann::json()},
                  {"selective", cfg.selective}, {"decimate_k", cfg.decimate_k}, {"sample_rate", cfg.sample_rate}},
                 [&](const fs::path& dir) {
                   std::vector<std::size_t> plan_idx(inv.count());
                   for (std::size_t i = 0; i < inv.count(); ++i) plan_idx[i] = i;
                   if (cfg.decimate_k > 1) plan_idx = refine::decimate_plan(inv.count(), cfg.decimate_k);
                   std::vector<long> plan;
                   for (auto i : plan_idx) plan.push_back(inv.frames[i]);
                   nlohmann::json j = {{"selective", cfg.selective}, {"decimate_k", cfg.decimate_k}, {"decimation_plan", plan}};
                   std::vector<long> generate = plan;
                   if (cfg.selective) {
                     const auto raw = assemble_trajectories(load_poses(run / "baseline_poses", inv), cfg.sample_rate);
                     const auto sel = refine::select_frames_for_regeneration(raw, cfg.refine);
                     generate.clear();
                     for (long f : plan) {
                       if (sel.frames.count(f)) generate.push_back(f);
                     }
                     j["selected"] = sel.frames;
                     j["low_confidence"] = sel.low_confidence;
                     j["swap_flagged"] = sel.swap_flagged;
                     j["outliers"] = sel.outliers;
                   }
                   j["generate_frames"] = generate;
                   util::write_file(dir / "selection.json", j.dump(2) + "\n");
                   return std::to_string(generate.size()) + " of " + std::to_string(inv.count()) + " frames to generate";
                 });
    const auto selection = nlohmann::json::parse(util::read_file(run / "selection/selection.json"));
    result.generation_frames = detail::read_frame_list(selection, "generate_frames");
    const std::set<long> generate(result.generation_frames.begin(), result.generation_frames.end());
    const auto selected = detail::read_frame_list(selection, "selected");
    const std::set<long> selected_set(selected.begin(), selected.end());

    runner.stage("generated", {"edges", "selection"},
                 {{"backend", detail::backend_slice(cfg.generate)}, {"positive", cfg.positive_prompt},
                  {"negative", cfg.negative_prompt}, {"seed", cfg.seed}, {"steps", cfg.steps}},
                 [&](const fs::path& dir) -> std::string {
                   if (generate.empty()) return "nothing to generate";
                   backend::BackendJob job;
                   job.job_id = "generate";
                   job.kind = backend::JobKind::Generate;
                   for (long f : generate) {
                     job.generation.push_back({f, run / "edges" / (frame_stem(f) + ".png"), dir / (frame_stem(f) + ".png"),
                                               cfg.positive_prompt, cfg.negative_prompt, cfg.seed, cfg.steps});
                   }
                   const auto missing = runner.call_backend(job, cfg.generate);
                   return std::to_string(missing.size()) + " frames without output";
                 });

    runner.stage("poses_generated", {"generated"}, {{"backend", detail::backend_slice(cfg.pose)}},
                 [&](const fs::path& dir) -> std::string {
                   backend::BackendJob job;
                   job.job_id = "pose_generated";
                   job.kind = backend::JobKind::EstimatePose;
                   for (long f : generate) {
                     const auto img = run / "generated" / (frame_stem(f) + ".png");
                     if (fs::exists(img)) job.pose.push_back({f, img, dir / pose_filename(kPosePrefix, f)});
                   }
                   if (job.pose.empty()) return "no generated images";
                   const auto missing = runner.call_backend(job, cfg.pose);
                   return std::to_string(missing.size()) + " frames without output";
                 });

    runner.stage("poses_raw", {"poses_generated", "baseline_poses", "selection"}, {{"selective", cfg.selective}},
                 [&](const fs::path& dir) {
                   std::string sources = "frame,source\n";
                   std::vector<FramePose> baseline;
                   if (cfg.selective) baseline = load_poses(run / "baseline_poses", inv);
                   for (std::size_t i = 0; i < inv.count(); ++i) {
                     const long f = inv.frames[i];
                     FramePose pose;
                     pose.frame_index = f;
                     pose.image_size = inv.size;
                     std::string source = "missing";
                     const auto gen_pose = run / "poses_generated" / pose_filename(kPosePrefix, f);
                     if (generate.count(f)) {
                       if (fs::exists(gen_pose)) {
                         const auto gsize = edgemap::png_size(run / "generated" / (frame_stem(f) + ".png"));
                         try {
                           pose = parse_pose_file(util::read_file(gen_pose), f, inv.size);
                           const double sx = static_cast<double>(inv.size.width) / gsize.width;
                           const double sy = static_cast<double>(inv.size.height) / gsize.height;
                           for (auto& k : pose.keypoints) {
                             if (!k.valid) continue;
                             k.x *= sx;
                             k.y *= sy;
                           }
                           source = "generated";
                         } catch (const Error& e) {
                           if (e.code() != ErrorCode::NoPersonDetected) throw;
                           source = "generated_empty";
                         }
                       }
                     } else if (cfg.selective && !selected_set.count(f)) {
                       pose = baseline[i];
                       source = "baseline";
                     }
                     bool any = false;
                     for (const auto& k : pose.keypoints) any = any || k.valid;
                     util::write_file(dir / pose_filename(kPosePrefix, f), any ? serialize_pose_document(pose) : empty_pose_document());
                     sources += std::to_string(f) + "," + source + "\n";
                   }
                   util::write_file(dir / "sources.csv", sources);
                   return std::string("merged");
                 });

    runner.stage("poses_refined", {"poses_raw", "baseline_poses"},
                 {{"refine", refine_json(cfg.refine)}, {"sample_rate", cfg.sample_rate}},
                 [&](const fs::path& dir) {
                   const auto zs = refine_poses(load_poses(run / "poses_raw", inv), cfg.refine, cfg.sample_rate);
                   util::write_file(dir / "trajectories.csv", format_trajectories_csv(zs.trajectories));
                   nlohmann::json log = {{"zero_shot", zs.log}};
                   if (cfg.needs_baseline()) {
                     const auto rp = refine_poses(load_poses(run / "baseline_poses", inv), cfg.refine, cfg.sample_rate);
                     util::write_file(dir / "raw_pose_trajectories.csv", format_trajectories_csv(rp.trajectories));
                     log["raw_pose"] = rp.log;
                   }
                   util::write_file(dir / "refine_log.json", log.dump(2) + "\n");
                   return std::string("refined");
                 });

    runner.stage("kinematics", {"poses_refined"},
                 {{"meta", meta_json(cfg.meta)}, {"filter_angles", cfg.refine.filter_angles},
                  {"truth", cfg.truth ? nlohmann::json{{"poses_dir", cfg.truth->poses_dir.string()},
                                                       {"prefix", cfg.truth->prefix},
                                                       {"angles_csv", cfg.truth->angles_csv ? cfg.truth->angles_csv->string() : ""}}
                                      : nlohmann::json()}},
                 [&](const fs::path& dir) -> std::string {
                   if (!is_sagittal(cfg.meta.camera_view)) return "skipped: view is not sagittal";
                   const std::map<std::string, std::string> inputs = {{"angles.csv", "trajectories.csv"},
                                                                      {"raw_pose_angles.csv", "raw_pose_trajectories.csv"}};
                   nlohmann::json log = nlohmann::json::object();
                   for (const auto& [out, in] : inputs) {
                     const auto src = run / "poses_refined" / in;
                     if (!fs::exists(src)) continue;
                     try {
                       auto angles = kinematics::compute_joint_angles(parse_trajectories_csv(util::read_file(src)), cfg.meta);
                       if (cfg.refine.filter_angles) filter_angles(angles, cfg.refine, cfg.sample_rate);
                       util::write_file(dir / out, kinematics::format_angles_csv(angles));
                       log[out] = {{"anterior_sign", angles.anterior.sign}};
                     } catch (const Error& e) {
                       if (e.code() != ErrorCode::DirectionAmbiguous) throw;
                       log[out] = {{"error", e.what()}};
                     }
                   }
                   if (cfg.truth) {
                     std::string text;
                     if (cfg.truth->angles_csv) {
                       text = util::read_file(*cfg.truth->angles_csv);
                     } else {
                       const auto truth = assemble_trajectories(load_poses(cfg.truth->poses_dir, inv, cfg.truth->prefix), cfg.sample_rate);
                       text = kinematics::format_angles_csv(kinematics::compute_joint_angles(truth, cfg.meta));
                     }
                     util::write_file(dir / "truth_angles.csv", text);
                   }
                   util::write_file(dir / "kinematics_log.json", log.dump(2) + "\n");
                   return std::string("angles computed");
                 });

    nlohmann::json events_slice;
    if (cfg.events_file) events_slice = {{"path", cfg.events_file->string()}, {"content", util::hex64(util::fnv1a(util::read_file(*cfg.events_file)))}};
    runner.stage("cycles", {"kinematics"}, {{"events", events_slice}}, [&](const fs::path& dir) -> std::string {
      if (!cfg.events_file) return "skipped: no events file";
      const auto events = gaitcycle::load_events(*cfg.events_file);
      const std::vector<std::tuple<std::string, std::string, std::string>> methods = {
          {"ZeroShot", "angles.csv", "ensemble.csv"},
          {"RawPose", "raw_pose_angles.csv", "raw_pose_ensemble.csv"},
          {"Truth", "truth_angles.csv", "truth_ensemble.csv"}};
      std::map<std::string, std::vector<gaitcycle::CycleEnsemble>> all;
      nlohmann::json log = nlohmann::json::object();
      for (const auto& [method, in, out] : methods) {
        const auto src = run / "kinematics" / in;
        if (!fs::exists(src)) continue;
        auto outcome = build_ensembles(kinematics::parse_angles_csv(util::read_file(src), cfg.meta.near_side()), events);
        util::write_file(dir / out, gaitcycle::format_ensemble_csv(outcome.ensembles));
        log[method] = outcome.log;
        all[method] = std::move(outcome.ensembles);
      }
      std::vector<gaitcycle::PlotSeries> series;
      for (const auto& m : {"ZeroShot", "RawPose", "Truth"}) {
        auto it = all.find(m);
        if (it == all.end()) continue;
        for (const auto& e : it->second) series.push_back({m, &e});
      }
      util::write_file(dir / "plot_data.csv", gaitcycle::format_plot_data(series));
      util::write_file(dir / "cycles.svg", gaitcycle::render_svg(series));
      util::write_file(dir / "cycles_log.json", log.dump(2) + "\n");
      return std::to_string(series.size()) + " ensembles";
    });

    runner.stage("report", {"cycles", "poses_refined", "poses_raw", "baseline_poses"}, {{"meta", meta_json(cfg.meta)}},
                 [&](const fs::path& dir) {
                   const auto report = evaluate_run(run, cfg);
                   util::write_file(dir / "report.json", metrics::report_json(report).dump(2) + "\n");
                   util::write_file(dir / "report.txt", metrics::render_report_table(report));
                   return std::string("report written");
                 });
    result.report = evaluate_run(run, cfg);
  } catch (const std::exception& e) {
    error = e.what();
    detail::write_run_manifest(run, cfg, result, runner.timings(), error);
    throw;
  }
  detail::write_run_manifest(run, cfg, result, runner.timings(), error);
  return result;
}

/// Runs (or reuses) each sequence with the raw-pose baseline enabled and
/// pools their errors into one comparative report written under `out_dir`.
inline metrics::ErrorReport run_compare(std::vector<PipelineConfig> configs, const fs::path& out_dir) {
  if (configs.empty()) throw Error(ErrorCode::InvalidArgument, "no sequences to compare");
  metrics::ErrorReport pooled;
  for (auto& cfg : configs) {
    if (!cfg.truth) throw Error(ErrorCode::MissingGroundTruth, "sequence " + cfg.work_dir.string() + " has no ground truth");
    cfg.baseline = true;
    const auto r = run_full(cfg);
    const auto& rep = *r.report;
    pooled.n_frames += rep.n_frames;
    for (const auto& [m, views] : rep.failures) pooled.merge_failures(m, views);
    for (const auto& [m, roles] : rep.errors) {
      for (const auto& [role, e] : roles) {
        auto& dst = pooled.errors[m][role];
        for (const auto& [seg, d] : e.coordinates_px) dst.coordinates_px[seg].insert(dst.coordinates_px[seg].end(), d.begin(), d.end());
        for (const auto& [j, d] : e.angles_deg) dst.angles_deg[j].insert(dst.angles_deg[j].end(), d.begin(), d.end());
      }
    }
    if (!pooled.scale && rep.scale) pooled.scale = rep.scale;
  }
  util::write_file(out_dir / "report.json", metrics::report_json(pooled).dump(2) + "\n");
  util::write_file(out_dir / "report.txt", metrics::render_report_table(pooled));
  return pooled;
}

}  // namespace gaitkit::pipeline
