#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "gaitkit/core/error.hpp"
#include "gaitkit/util/fs.hpp"

namespace gaitkit::backend {

inline constexpr std::string_view kManifestVersion = "1";
inline constexpr std::string_view kDefaultPositivePrompt =
    "an able-body person walking, intact lower limbs, 2 legs, full-body portrait, realistic";
inline constexpr std::string_view kDefaultNegativePrompt = "cyborg, amputee, panfuturism";

enum class JobKind { Generate, EstimatePose };
enum class JobStatus { Pending, Running, Done, Failed };

constexpr std::string_view kind_name(JobKind k) { return k == JobKind::Generate ? "generate" : "estimate_pose"; }
inline JobKind kind_from_name(std::string_view s) {
  if (s == "generate") return JobKind::Generate;
  if (s == "estimate_pose") return JobKind::EstimatePose;
  throw Error(ErrorCode::MalformedDocument, "unknown job kind '" + std::string(s) + "'");
}
constexpr std::string_view status_name(JobStatus s) {
  switch (s) {
    case JobStatus::Pending: return "pending";
    case JobStatus::Running: return "running";
    case JobStatus::Done: return "done";
    case JobStatus::Failed: return "failed";
  }
  return "?";
}

struct GenerationRequest {
  long frame = 0;
  std::filesystem::path edge_map_path;
  std::filesystem::path output_path;
  std::string positive_prompt{kDefaultPositivePrompt};
  std::string negative_prompt{kDefaultNegativePrompt};
  long long seed = 0;
  int steps = 20;
};

struct PoseRequest {
  long frame = 0;
  std::filesystem::path image_path;
  std::filesystem::path output_pose_path;
};

/// One batch for an external backend. Exactly one of the request lists is
/// used, according to `kind`.
class BackendJob {
 public:
  std::string job_id;
  JobKind kind = JobKind::Generate;
  std::vector<GenerationRequest> generation;
  std::vector<PoseRequest> pose;
  nlohmann::json params = nlohmann::json::object();  // passed through untouched
  int max_parallel = 1;

  // Filled in by run_backend.
  std::map<long, double> seconds_per_request;
  std::vector<long> missing_outputs;
  int exit_code = 0;
  std::string diagnostics;
  double wall_seconds = 0.0;

  [[nodiscard]] JobStatus status() const { return status_; }
  [[nodiscard]] std::size_t size() const {
    return kind == JobKind::Generate ? generation.size() : pose.size();
  }

  void start() { transition(JobStatus::Pending, JobStatus::Running); }
  void finish(bool ok) { transition(JobStatus::Running, ok ? JobStatus::Done : JobStatus::Failed); }

  [[nodiscard]] std::vector<std::pair<long, std::filesystem::path>> outputs() const {
    std::vector<std::pair<long, std::filesystem::path>> out;
    if (kind == JobKind::Generate) {
      for (const auto& r : generation) out.emplace_back(r.frame, r.output_path);
    } else {
      for (const auto& r : pose) out.emplace_back(r.frame, r.output_pose_path);
    }
    return out;
  }

 private:
  JobStatus status_ = JobStatus::Pending;

  void transition(JobStatus from, JobStatus to) {
    if (status_ != from) {
      throw Error(ErrorCode::InvalidArgument, "job " + job_id + " cannot move from " +
                                                  std::string(status_name(status_)) + " to " +
                                                  std::string(status_name(to)));
    }
    status_ = to;
  }
};

/// Structural checks shared by manifest writing and the conformance checker.
inline void validate_job(const BackendJob& job) {
  if (job.size() == 0) throw Error(ErrorCode::EmptyJob, "job " + job.job_id + " has no requests");
  if (job.max_parallel < 1) throw Error(ErrorCode::InvalidArgument, "max_parallel must be >= 1");
  std::set<std::filesystem::path> seen;
  for (const auto& [frame, out] : job.outputs()) {
    const auto key = std::filesystem::absolute(out).lexically_normal();
    if (!seen.insert(key).second) throw Error(ErrorCode::DuplicateOutput, "duplicate output path " + key.string());
  }
  for (const auto& r : job.generation) {
    if (r.positive_prompt.empty() || r.negative_prompt.empty()) {
      throw Error(ErrorCode::InvalidArgument, "prompts must be non-empty");
    }
  }
}

inline nlohmann::json manifest_json(const BackendJob& job) {
  auto abs = [](const std::filesystem::path& p) { return std::filesystem::absolute(p).lexically_normal().string(); };
  nlohmann::json reqs = nlohmann::json::array();
  if (job.kind == JobKind::Generate) {
    for (const auto& r : job.generation) {
      reqs.push_back({{"frame", r.frame},
                      {"edge_map_path", abs(r.edge_map_path)},
                      {"output_path", abs(r.output_path)},
                      {"positive_prompt", r.positive_prompt},
                      {"negative_prompt", r.negative_prompt},
                      {"seed", r.seed},
                      {"steps", r.steps}});
    }
  } else {
    for (const auto& r : job.pose) {
      reqs.push_back({{"frame", r.frame}, {"image_path", abs(r.image_path)}, {"output_pose_path", abs(r.output_pose_path)}});
    }
  }
  return {{"version", kManifestVersion}, {"job_id", job.job_id},          {"kind", kind_name(job.kind)},
          {"max_parallel", job.max_parallel}, {"params", job.params}, {"requests", reqs}};
}

/// Writes `<dir>/<job_id>.manifest.json` and returns its absolute path.
inline std::filesystem::path write_manifest(const BackendJob& job, const std::filesystem::path& dir) {
  validate_job(job);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
  const auto path = std::filesystem::absolute(dir / (job.job_id + ".manifest.json"));
  util::write_file(path, manifest_json(job).dump(2) + "\n");
  return path;
}

/// Parses a manifest, rejecting any version other than the current one.
inline BackendJob read_manifest(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(util::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedDocument, std::string("manifest: ") + e.what());
  }
  if (!j.is_object() || !j.contains("version") || j["version"] != kManifestVersion) {
    throw Error(ErrorCode::MalformedDocument, "unsupported manifest version");
  }
  BackendJob job;
  try {
    job.job_id = j.at("job_id").get<std::string>();
    job.kind = kind_from_name(j.at("kind").get<std::string>());
    job.max_parallel = j.value("max_parallel", 1);
    job.params = j.value("params", nlohmann::json::object());
    for (const auto& r : j.at("requests")) {
      if (job.kind == JobKind::Generate) {
        job.generation.push_back({r.at("frame").get<long>(), r.at("edge_map_path").get<std::string>(),
                                  r.at("output_path").get<std::string>(), r.at("positive_prompt").get<std::string>(),
                                  r.at("negative_prompt").get<std::string>(), r.value("seed", 0LL), r.value("steps", 20)});
      } else {
        job.pose.push_back({r.at("frame").get<long>(), r.at("image_path").get<std::string>(),
                            r.at("output_pose_path").get<std::string>()});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedDocument, std::string("manifest: ") + e.what());
  }
  return job;
}

}  // namespace gaitkit::backend
