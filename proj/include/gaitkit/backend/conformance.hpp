#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "gaitkit/backend/mock.hpp"
#include "gaitkit/backend/runner.hpp"
#include "gaitkit/core/pose_io.hpp"
#include "gaitkit/edgemap/canny.hpp"
#include "gaitkit/edgemap/png_io.hpp"

namespace gaitkit::backend {

struct ConformanceCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ConformanceReport {
  std::vector<ConformanceCheck> checks;
  [[nodiscard]] bool passed() const {
    for (const auto& c : checks) {
      if (!c.passed) return false;
    }
    return !checks.empty();
  }
};

struct ConformanceOptions {
  JobKind kind = JobKind::Generate;
  std::filesystem::path executable;
  std::filesystem::path work_dir;
  nlohmann::json params = nlohmann::json::object();
  std::optional<ImageSize> expected_size;  // generation outputs must match when set
  double timeout_s = 600.0;
  std::size_t n_requests = 3;
};

namespace detail {

/// 512x512 frame with a dark rectangle standing in for a figure.
inline edgemap::RgbImage conformance_image(std::size_t i) {
  edgemap::RgbImage img(512, 512, 200);
  const int x0 = 180 + 20 * static_cast<int>(i);
  for (int y = 100; y < 420; ++y) {
    for (int x = x0; x < x0 + 120; ++x) {
      for (std::size_t c = 0; c < 3; ++c) img.at(x, y, c) = 40;
    }
  }
  return img;
}

inline std::set<std::filesystem::path> files_under(const std::filesystem::path& dir) {
  std::set<std::filesystem::path> out;
  if (!std::filesystem::exists(dir)) return out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out.insert(std::filesystem::absolute(e.path()).lexically_normal());
  }
  return out;
}

}  // namespace detail

/// Exercises a backend executable against the manifest contract: a valid job
/// must exit 0 and write exactly the declared, schema-valid outputs; a
/// manifest with an unsupported version must exit 3 and write nothing.
inline ConformanceReport check_conformance(const ConformanceOptions& opt) {
  namespace fs = std::filesystem;
  ConformanceReport report;
  auto add = [&](std::string name, bool ok, std::string detail = {}) {
    report.checks.push_back({std::move(name), ok, std::move(detail)});
  };
  const fs::path root = fs::absolute(opt.work_dir);
  fs::remove_all(root);
  const fs::path inputs = root / "inputs", outputs = root / "outputs", rejected = root / "rejected";
  fs::create_directories(inputs);
  fs::create_directories(outputs);
  fs::create_directories(rejected);

  BackendJob job;
  job.job_id = opt.kind == JobKind::Generate ? "conformance_generate" : "conformance_pose";
  job.kind = opt.kind;
  job.params = opt.params;
  for (std::size_t i = 0; i < opt.n_requests; ++i) {
    const long frame = static_cast<long>(i);
    const auto stem = "frame_" + util::zero_pad(frame, 12);
    const auto image = detail::conformance_image(i);
    if (opt.kind == JobKind::Generate) {
      const auto edge = inputs / (stem + ".png");
      edgemap::write_png(edge, edgemap::canny(edgemap::to_grayscale(image)).to_image());
      job.generation.push_back({frame, edge, outputs / (stem + ".png")});
    } else {
      const auto img = inputs / (stem + ".png");
      edgemap::write_png(img, image);
      job.pose.push_back({frame, img, outputs / pose_filename("frame", frame)});
    }
  }

  const auto manifest = write_manifest(job, root);
  std::set<fs::path> declared;
  for (const auto& [f, p] : job.outputs()) declared.insert(fs::absolute(p).lexically_normal());
  try {
    run_backend(job, opt.executable, manifest, opt.timeout_s, root / "backend.log");
    add("exit_status_zero", job.exit_code == 0, "exit code " + std::to_string(job.exit_code));
  } catch (const Error& e) {
    add("exit_status_zero", false, e.what());
    return report;
  }

  add("all_outputs_written", job.missing_outputs.empty(),
      std::to_string(job.missing_outputs.size()) + " of " + std::to_string(job.size()) + " missing");

  std::set<fs::path> undeclared;
  for (const auto& p : detail::files_under(outputs)) {
    if (!declared.count(p)) undeclared.insert(p);
  }
  add("no_undeclared_outputs", undeclared.empty(),
      undeclared.empty() ? "" : "unexpected file " + undeclared.begin()->string());

  std::string schema_error;
  for (const auto& [frame, path] : job.outputs()) {
    if (!fs::exists(path)) continue;
    try {
      if (opt.kind == JobKind::Generate) {
        const auto size = edgemap::png_size(path);
        if (opt.expected_size && (size.width != opt.expected_size->width || size.height != opt.expected_size->height)) {
          schema_error = path.filename().string() + " is " + std::to_string(size.width) + "x" +
                         std::to_string(size.height);
        }
      } else {
        try {
          (void)parse_pose_file(util::read_file(path), frame, {512, 512});
        } catch (const Error& e) {
          if (e.code() != ErrorCode::NoPersonDetected) throw;
        }
      }
    } catch (const Error& e) {
      schema_error = path.filename().string() + ": " + e.what();
    }
    if (!schema_error.empty()) break;
  }
  add(opt.kind == JobKind::Generate ? "outputs_are_png" : "outputs_are_body25", schema_error.empty(), schema_error);

  // Same requests re-targeted at a fresh directory, under a bogus version.
  auto bad = manifest_json(job);
  bad["version"] = "999";
  for (auto& r : bad["requests"]) {
    const char* key = opt.kind == JobKind::Generate ? "output_path" : "output_pose_path";
    r[key] = (rejected / fs::path(r[key].get<std::string>()).filename()).string();
  }
  const auto bad_manifest = root / "unsupported.manifest.json";
  util::write_file(bad_manifest, bad.dump(2));
  try {
    const int code = detail::spawn_and_wait(opt.executable, bad_manifest, root / "backend_unsupported.log", opt.timeout_s);
    add("unsupported_version_exit_3", code == kExitBadManifest, "exit code " + std::to_string(code));
    add("unsupported_version_writes_nothing", detail::files_under(rejected).empty());
  } catch (const Error& e) {
    add("unsupported_version_exit_3", false, e.what());
  }
  return report;
}

inline nlohmann::json conformance_json(const ConformanceReport& r) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : r.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  return {{"passed", r.passed()}, {"checks", checks}};
}

}  // namespace gaitkit::backend
