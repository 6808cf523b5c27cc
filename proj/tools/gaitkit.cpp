#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "gaitkit/backend/conformance.hpp"
#include "gaitkit/pipeline/pipeline.hpp"
#include "gaitkit/synthgait/fixture.hpp"

namespace fs = std::filesystem;
using namespace gaitkit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitStage = 2;
constexpr int kExitBackend = 3;

nlohmann::json read_json(const std::string& path) {
  try {
    return nlohmann::json::parse(util::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Config, "cannot parse " + path + ": " + e.what());
  }
}

struct RefineFlags {
  refine::RefineConfig cfg;
  std::string gate = "per_joint";
  bool single_pass = false;

  void add(CLI::App* app) {
    app->add_option("--threshold", cfg.confidence_threshold, "Confidence gate; samples below are removed")->capture_default_str();
    app->add_option("--order", cfg.butterworth_order, "Butterworth order (even)")->capture_default_str();
    app->add_option("--cutoff", cfg.cutoff_hz, "Low-pass cutoff in Hz")->capture_default_str();
    app->add_flag("--single-pass", single_pass, "Filter forward only instead of forward-backward");
    app->add_option("--max-gap", cfg.max_interp_gap, "Longest interior gap (frames) filled by the spline")->capture_default_str();
    app->add_option("--gate", gate, "Gating granularity")->check(CLI::IsMember({"per_joint", "per_frame"}))->capture_default_str();
  }
  refine::RefineConfig get() const {
    auto c = cfg;
    c.zero_phase = !single_pass;
    c.gate_mode = gate == "per_frame" ? refine::GateMode::PerFrame : refine::GateMode::PerJoint;
    return c;
  }
};

struct MetaFlags {
  std::string view = "RightSagittal", direction = "Auto", prosthetic = "Right";

  void add(CLI::App* app) {
    app->add_option("--view", view, "Camera view")
        ->check(CLI::IsMember({"AnteriorFrontal", "PosteriorFrontal", "LeftSagittal", "RightSagittal"}))
        ->capture_default_str();
    app->add_option("--direction", direction, "Walking direction in the image")
        ->check(CLI::IsMember({"ImagePlusX", "ImageMinusX", "Auto"}))
        ->capture_default_str();
    app->add_option("--prosthetic-side", prosthetic, "Side of the prosthetic limb")
        ->check(CLI::IsMember({"Left", "Right"}))
        ->capture_default_str();
  }
  SequenceMeta get() const {
    SequenceMeta m;
    m.camera_view = view_from_name(view);
    m.walking_direction = direction_from_name(direction);
    m.prosthetic_side = side_from_name(prosthetic);
    return m;
  }
};

/// Frames present in a pose directory as a contiguous range.
std::pair<long, std::size_t> pose_range(const fs::path& dir, const std::string& prefix) {
  std::vector<long> ords;
  for (const auto& p : util::list_files(dir, "_keypoints.json")) {
    if (p.filename().string().rfind(prefix + "_", 0) != 0) continue;
    if (auto o = util::ordinal_from_name(fs::path(p.stem().string().substr(0, p.stem().string().size() - 10)))) ords.push_back(*o);
  }
  if (ords.empty()) throw Error(ErrorCode::EmptyInput, "no pose files with prefix '" + prefix + "' in " + dir.string());
  std::sort(ords.begin(), ords.end());
  return {ords.front(), static_cast<std::size_t>(ords.back() - ords.front() + 1)};
}

int run_backend_job(backend::BackendJob& job, const std::string& exe, const fs::path& out_dir, double timeout) {
  const auto manifest = backend::write_manifest(job, out_dir);
  backend::run_backend(job, exe, manifest, timeout, out_dir / (job.job_id + ".log"));
  std::cout << job.size() - job.missing_outputs.size() << "/" << job.size() << " outputs, status "
            << backend::status_name(job.status()) << "\n";
  if (!job.missing_outputs.empty()) {
    std::cerr << "missing outputs for frames:";
    for (long f : job.missing_outputs) std::cerr << " " << f;
    std::cerr << "\n";
  }
  return job.status() == backend::JobStatus::Done ? kExitOk : kExitBackend;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gaitkit: zero-shot pose post-processing and gait kinematics toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  // edges
  auto* edges = app.add_subcommand("edges", "Canny edge maps for a directory of PNG frames");
  std::string e_in, e_out, e_order = "resize_then_canny", e_suffix = ".png";
  pipeline::EdgeConfig e_cfg;
  std::size_t e_workers = 1;
  edges->add_option("--input", e_in, "Frame directory")->required();
  edges->add_option("--output", e_out, "Edge map directory")->required();
  edges->add_option("--low", e_cfg.canny.low_threshold, "Hysteresis low threshold (gradient magnitude)")->capture_default_str();
  edges->add_option("--high", e_cfg.canny.high_threshold, "Hysteresis high threshold")->capture_default_str();
  edges->add_option("--sigma", e_cfg.canny.sigma, "Gaussian blur sigma")->capture_default_str();
  edges->add_option("--kernel", e_cfg.canny.kernel_size, "Gaussian kernel size")->capture_default_str();
  edges->add_option("--width", e_cfg.width, "Edge map width")->capture_default_str();
  edges->add_option("--height", e_cfg.height, "Edge map height")->capture_default_str();
  edges->add_option("--order", e_order, "Resize before or after edge detection")
      ->check(CLI::IsMember({"resize_then_canny", "canny_then_resize"}))
      ->capture_default_str();
  edges->add_option("--suffix", e_suffix, "Frame file suffix")->capture_default_str();
  edges->add_option("--workers", e_workers, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);

  // generate
  auto* gen = app.add_subcommand("generate", "Run an image-generation backend over edge maps");
  std::string g_exe, g_edges, g_out, g_params;
  std::string g_pos{backend::kDefaultPositivePrompt}, g_neg{backend::kDefaultNegativePrompt};
  long long g_seed = 0;
  int g_steps = 20, g_parallel = 1;
  double g_timeout = 3600;
  gen->add_option("--exe", g_exe, "Backend executable")->required()->check(CLI::ExistingFile);
  gen->add_option("--edges", g_edges, "Edge map directory")->required()->check(CLI::ExistingDirectory);
  gen->add_option("--output", g_out, "Generated image directory")->required();
  gen->add_option("--prompt", g_pos, "Positive prompt")->capture_default_str();
  gen->add_option("--negative", g_neg, "Negative prompt")->capture_default_str();
  gen->add_option("--seed", g_seed, "Generation seed")->capture_default_str();
  gen->add_option("--steps", g_steps, "Sampler steps (passed through)")->capture_default_str();
  gen->add_option("--max-parallel", g_parallel, "Concurrency advertised to the backend")->capture_default_str();
  gen->add_option("--timeout", g_timeout, "Seconds before the backend is killed")->capture_default_str();
  gen->add_option("--params", g_params, "JSON file of opaque backend parameters");

  // pose
  auto* pose = app.add_subcommand("pose", "Run a pose-estimation backend over images");
  std::string p_exe, p_images, p_out, p_params, p_prefix = "frame";
  int p_parallel = 1;
  double p_timeout = 3600;
  pose->add_option("--exe", p_exe, "Backend executable")->required()->check(CLI::ExistingFile);
  pose->add_option("--images", p_images, "Image directory (PNG)")->required()->check(CLI::ExistingDirectory);
  pose->add_option("--output", p_out, "Pose document directory")->required();
  pose->add_option("--prefix", p_prefix, "Pose file prefix")->capture_default_str();
  pose->add_option("--max-parallel", p_parallel, "Concurrency advertised to the backend")->capture_default_str();
  pose->add_option("--timeout", p_timeout, "Seconds before the backend is killed")->capture_default_str();
  pose->add_option("--params", p_params, "JSON file of opaque backend parameters");

  // refine
  auto* ref = app.add_subcommand("refine", "Gate, swap-correct, interpolate and filter pose trajectories");
  std::string r_poses, r_out, r_prefix = "frame";
  double r_rate = kDefaultSampleRate;
  RefineFlags r_flags;
  ref->add_option("--poses", r_poses, "Pose document directory")->required()->check(CLI::ExistingDirectory);
  ref->add_option("--prefix", r_prefix, "Pose file prefix")->capture_default_str();
  ref->add_option("--output", r_out, "Output directory")->required();
  ref->add_option("--rate", r_rate, "Sample rate in Hz")->capture_default_str();
  r_flags.add(ref);

  // kinematics
  auto* kin = app.add_subcommand("kinematics", "Sagittal hip, knee and ankle angles from trajectories");
  std::string k_traj, k_out;
  MetaFlags k_meta;
  kin->add_option("--trajectories", k_traj, "Trajectory CSV")->required()->check(CLI::ExistingFile);
  kin->add_option("--output", k_out, "Angle CSV")->required();
  k_meta.add(kin);

  // cycles
  auto* cyc = app.add_subcommand("cycles", "Gait-cycle normalization and ensemble curves");
  std::string c_angles, c_events, c_out, c_method = "ZeroShot";
  cyc->add_option("--angles", c_angles, "Angle CSV")->required()->check(CLI::ExistingFile);
  cyc->add_option("--events", c_events, "Heel-strike CSV (frame,side,kind)")->required()->check(CLI::ExistingFile);
  cyc->add_option("--output", c_out, "Output directory")->required();
  cyc->add_option("--method", c_method, "Label used in plot data")->capture_default_str();

  // eval
  auto* ev = app.add_subcommand("eval", "Recompute the error report from a run directory's stage outputs");
  std::string ev_cfg, ev_out;
  ev->add_option("--config", ev_cfg, "Pipeline config of the run")->required()->check(CLI::ExistingFile);
  ev->add_option("--output", ev_out, "Directory for report.json and report.txt (default: <run>/report_recomputed)");

  // compare
  auto* cmp = app.add_subcommand("compare", "Raw-pose versus zero-shot comparison over one or more sequences");
  std::vector<std::string> cmp_cfgs;
  std::string cmp_out;
  cmp->add_option("--config", cmp_cfgs, "Pipeline config per sequence (repeatable)")->required()->check(CLI::ExistingFile);
  cmp->add_option("--output", cmp_out, "Directory for the pooled report")->required();

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "Full run: edges, generation, pose, refinement, kinematics, cycles, report");
  std::string pl_cfg, pl_work;
  std::size_t pl_workers = 0;
  pipe->add_option("--config", pl_cfg, "Pipeline config (JSON)")->required()->check(CLI::ExistingFile);
  pipe->add_option("--work-dir", pl_work, "Override the run directory");
  pipe->add_option("--workers", pl_workers, "Override the worker count");

  // synth
  auto* syn = app.add_subcommand("synth", "Synthetic gait fixture: truth poses, angles, events and corrupted variants");
  std::string s_out, s_model;
  std::vector<std::string> s_variants;
  std::size_t s_frames = 180, s_workers = 1;
  double s_rate = kDefaultSampleRate;
  std::uint64_t s_seed = 0;
  bool s_render = false;
  syn->add_option("--output", s_out, "Fixture directory")->required();
  syn->add_option("--frames", s_frames, "Number of frames")->capture_default_str();
  syn->add_option("--rate", s_rate, "Sample rate in Hz")->capture_default_str();
  syn->add_option("--model", s_model, "Gait model JSON (defaults when absent)");
  syn->add_option("--variant", s_variants, "NAME:SPEC.json corrupted variant (repeatable)");
  syn->add_option("--seed", s_seed, "Corruption seed")->capture_default_str();
  syn->add_flag("--render", s_render, "Also render stick-figure PNG frames");
  syn->add_option("--workers", s_workers, "Worker threads for rendering")->capture_default_str();

  // conformance
  auto* conf = app.add_subcommand("conformance", "Check a backend executable against the manifest protocol");
  std::string cf_kind, cf_exe, cf_dir = "conformance_run", cf_params, cf_size;
  double cf_timeout = 600;
  conf->add_option("--kind", cf_kind, "Backend kind")->required()->check(CLI::IsMember({"generate", "pose"}));
  conf->add_option("--exe", cf_exe, "Backend executable")->required()->check(CLI::ExistingFile);
  conf->add_option("--work-dir", cf_dir, "Scratch directory (wiped)")->capture_default_str();
  conf->add_option("--params", cf_params, "JSON file of opaque backend parameters");
  conf->add_option("--expect-size", cf_size, "Required generated image size, WxH (e.g. 512x512)");
  conf->add_option("--timeout", cf_timeout, "Seconds before the backend is killed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*edges) {
      e_cfg.order = e_order == "resize_then_canny" ? pipeline::EdgeOrder::ResizeThenCanny : pipeline::EdgeOrder::CannyThenResize;
      e_cfg.canny.validate();
      const auto files = util::list_files(e_in, e_suffix);
      util::parallel_for(files.size(), e_workers, [&](std::size_t i) {
        edgemap::write_png(fs::path(e_out) / files[i].filename(),
                           pipeline::edge_image(edgemap::read_png<3>(files[i]), e_cfg));
      });
      std::cout << files.size() << " edge maps written to " << e_out << "\n";
    } else if (*gen) {
      backend::BackendJob job;
      job.job_id = "generate";
      job.kind = backend::JobKind::Generate;
      job.max_parallel = g_parallel;
      if (!g_params.empty()) job.params = read_json(g_params);
      for (const auto& p : util::list_files(g_edges, ".png")) {
        const auto f = util::ordinal_from_name(p);
        if (!f) throw Error(ErrorCode::Config, "edge map without an ordinal: " + p.string());
        job.generation.push_back({*f, p, fs::path(g_out) / p.filename(), g_pos, g_neg, g_seed, g_steps});
      }
      return run_backend_job(job, g_exe, g_out, g_timeout);
    } else if (*pose) {
      backend::BackendJob job;
      job.job_id = "pose";
      job.kind = backend::JobKind::EstimatePose;
      job.max_parallel = p_parallel;
      if (!p_params.empty()) job.params = read_json(p_params);
      for (const auto& p : util::list_files(p_images, ".png")) {
        const auto f = util::ordinal_from_name(p);
        if (!f) throw Error(ErrorCode::Config, "image without an ordinal: " + p.string());
        job.pose.push_back({*f, p, fs::path(p_out) / pose_filename(p_prefix, *f)});
      }
      return run_backend_job(job, p_exe, p_out, p_timeout);
    } else if (*ref) {
      const auto [first, count] = pose_range(r_poses, r_prefix);
      const auto frames = load_pose_directory(r_poses, r_prefix, first, count, {1, 1});
      const auto out = pipeline::refine_poses(frames, r_flags.get(), r_rate);
      util::write_file(fs::path(r_out) / "trajectories.csv", format_trajectories_csv(out.trajectories));
      util::write_file(fs::path(r_out) / "refine_log.json", out.log.dump(2) + "\n");
      std::cout << "refined " << count << " frames into " << r_out << "\n";
    } else if (*kin) {
      const auto angles = kinematics::compute_joint_angles(parse_trajectories_csv(util::read_file(k_traj)), k_meta.get());
      util::write_file(k_out, kinematics::format_angles_csv(angles));
      std::cout << "angles written to " << k_out << " (anterior " << (angles.anterior.sign > 0 ? "+x" : "-x") << ")\n";
    } else if (*cyc) {
      const auto outcome = pipeline::build_ensembles(kinematics::parse_angles_csv(util::read_file(c_angles)),
                                                     gaitcycle::load_events(c_events));
      std::vector<gaitcycle::PlotSeries> series;
      for (const auto& e : outcome.ensembles) series.push_back({c_method, &e});
      util::write_file(fs::path(c_out) / "ensemble.csv", gaitcycle::format_ensemble_csv(outcome.ensembles));
      util::write_file(fs::path(c_out) / "plot_data.csv", gaitcycle::format_plot_data(series));
      util::write_file(fs::path(c_out) / "cycles.svg", gaitcycle::render_svg(series));
      util::write_file(fs::path(c_out) / "cycles_log.json", outcome.log.dump(2) + "\n");
      if (outcome.ensembles.empty()) throw Error(ErrorCode::NoCycles, "no side produced an accepted cycle");
      std::cout << outcome.ensembles.size() << " ensembles written to " << c_out << "\n";
    } else if (*ev) {
      const auto cfg = pipeline::load_config(ev_cfg);
      const auto report = pipeline::evaluate_run(cfg.work_dir, cfg);
      const fs::path out = ev_out.empty() ? cfg.work_dir / "report_recomputed" : fs::path(ev_out);
      util::write_file(out / "report.json", metrics::report_json(report).dump(2) + "\n");
      util::write_file(out / "report.txt", metrics::render_report_table(report));
      std::cout << metrics::render_report_table(report);
    } else if (*cmp) {
      std::vector<pipeline::PipelineConfig> cfgs;
      for (const auto& c : cmp_cfgs) cfgs.push_back(pipeline::load_config(c));
      std::cout << metrics::render_report_table(pipeline::run_compare(std::move(cfgs), cmp_out));
    } else if (*pipe) {
      auto cfg = pipeline::load_config(pl_cfg);
      if (!pl_work.empty()) cfg.work_dir = fs::absolute(pl_work);
      if (pl_workers > 0) cfg.workers = pl_workers;
      const auto r = pipeline::run_full(cfg);
      for (const auto& s : r.stages) {
        std::cout << (s.executed ? "ran    " : "cached ") << s.name << (s.note.empty() ? "" : "  (" + s.note + ")") << "\n";
      }
      std::cout << "backend calls: " << r.backend_calls << "\n";
      if (r.report) std::cout << metrics::render_report_table(*r.report);
    } else if (*syn) {
      synthgait::FixtureOptions opt;
      if (!s_model.empty()) opt.model = synthgait::model_from_json(read_json(s_model));
      opt.n_frames = s_frames;
      opt.sample_rate = s_rate;
      opt.seed = s_seed;
      opt.render_frames = s_render;
      opt.workers = s_workers;
      for (const auto& v : s_variants) {
        const auto colon = v.find(':');
        if (colon == std::string::npos || colon == 0) throw Error(ErrorCode::Config, "variant must be NAME:SPEC.json");
        opt.variants[v.substr(0, colon)] = synthgait::spec_from_json(read_json(v.substr(colon + 1)));
      }
      const auto fx = synthgait::write_fixture(s_out, opt);
      std::cout << "fixture with " << s_frames << " frames and " << fx.truth.events.size() << " heel strikes in " << s_out << "\n";
    } else if (*conf) {
      backend::ConformanceOptions opt;
      opt.kind = cf_kind == "generate" ? backend::JobKind::Generate : backend::JobKind::EstimatePose;
      opt.executable = fs::absolute(cf_exe);
      opt.work_dir = cf_dir;
      opt.timeout_s = cf_timeout;
      if (!cf_params.empty()) opt.params = read_json(cf_params);
      if (!cf_size.empty()) {
        const auto x = cf_size.find('x');
        if (x == std::string::npos) throw Error(ErrorCode::Config, "--expect-size must look like 512x512");
        opt.expected_size = ImageSize{std::stoi(cf_size.substr(0, x)), std::stoi(cf_size.substr(x + 1))};
      }
      const auto report = backend::check_conformance(opt);
      for (const auto& c : report.checks) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << (c.detail.empty() ? "" : "  " + c.detail) << "\n";
      }
      return report.passed() ? kExitOk : kExitBackend;
    }
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return e.code() == ErrorCode::BackendFailed || e.code() == ErrorCode::BackendTimeout ? kExitBackend : kExitStage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitStage;
  }
  return kExitOk;
}
