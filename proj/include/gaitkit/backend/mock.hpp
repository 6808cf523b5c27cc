#pragma once

#include <filesystem>
#include <iostream>
#include <set>
#include <string>

#include <json.hpp>

#include "gaitkit/backend/protocol.hpp"
#include "gaitkit/core/pose_io.hpp"
#include "gaitkit/edgemap/png_io.hpp"
#include "gaitkit/synthgait/corrupt.hpp"

// Test doubles for the two model stages. The executables in tools/ are thin
// wrappers around mock_generate_main and mock_pose_main.

namespace gaitkit::backend {

/// Exit codes shared by the mock executables and expected of real adapters.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitPartial = 2;      // some requests failed, others were written
inline constexpr int kExitBadManifest = 3;  // unreadable or unsupported manifest

/// Renders one pose document per frame from (optionally corrupted)
/// trajectories. Frames with no valid keypoint get a zero-person document.
inline synthgait::CorruptionLog mock_pose_backend(const TrajectorySet& traj, const synthgait::CorruptionSpec& spec,
                                                  std::uint64_t seed, const std::filesystem::path& dir,
                                                  std::string_view prefix, ImageSize image_size) {
  auto corrupted = synthgait::corrupt(traj, spec, seed);
  for (std::size_t t = 0; t < traj.length; ++t) {
    const auto pose = frame_from_trajectories(corrupted.trajectories, t, image_size);
    bool any = false;
    for (const auto& k : pose.keypoints) any = any || k.valid;
    util::write_file(dir / pose_filename(prefix, pose.frame_index),
                     any ? serialize_pose_document(pose) : empty_pose_document());
  }
  return corrupted.log;
}

namespace detail {

inline std::set<long> fail_frames(const nlohmann::json& params) {
  std::set<long> out;
  if (params.contains("fail_frames")) {
    for (const auto& f : params.at("fail_frames")) out.insert(f.get<long>());
  }
  return out;
}

inline std::optional<std::filesystem::path> manifest_arg(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string_view(argv[i]) == "--manifest") return std::filesystem::path(argv[i + 1]);
  }
  return std::nullopt;
}

/// Scales the coordinates of every detected keypoint in a pose document.
inline std::string rescale_pose_document(std::string_view doc, double sx, double sy) {
  auto j = nlohmann::json::parse(doc);
  for (auto& person : j.at("people")) {
    auto& flat = person.at("pose_keypoints_2d");
    for (std::size_t k = 0; k + 2 < flat.size(); k += 3) {
      if (flat[k + 2].get<double>() > 0.0) {
        flat[k] = flat[k].get<double>() * sx;
        flat[k + 1] = flat[k + 1].get<double>() * sy;
      }
    }
  }
  return j.dump();
}

template <typename Body>
int mock_main(int argc, char** argv, JobKind expected, Body body) {
  const auto manifest = manifest_arg(argc, argv);
  if (!manifest) {
    std::cerr << "usage: " << (argc > 0 ? argv[0] : "mock") << " --manifest <path>\n";
    return kExitUsage;
  }
  BackendJob job;
  try {
    job = read_manifest(*manifest);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return kExitBadManifest;
  }
  if (job.kind != expected) {
    std::cerr << "wrong job kind " << kind_name(job.kind) << "\n";
    return kExitBadManifest;
  }
  const auto failing = fail_frames(job.params);
  int failed = 0;
  try {
    failed = body(job, failing);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitPartial;
  }
  return failed ? kExitPartial : kExitOk;
}

}  // namespace detail

/// Identity generator: copies each edge map to its output path. Frames
/// listed in params.fail_frames are skipped and reported on stderr.
inline int mock_generate_main(int argc, char** argv) {
  return detail::mock_main(argc, argv, JobKind::Generate, [](const BackendJob& job, const std::set<long>& failing) {
    int failed = 0;
    for (const auto& r : job.generation) {
      if (failing.count(r.frame)) {
        std::cerr << "frame " << r.frame << ": injected failure\n";
        ++failed;
        continue;
      }
      util::write_file(r.output_path, util::read_file(r.edge_map_path));
    }
    return failed;
  });
}

/// Pose server: answers each request with the document for the same frame
/// from params.source_dir (prefix params.source_prefix), rescaled from
/// params.source_width x params.source_height to the request image's size.
/// A frame without a source document, or with no source_dir at all, gets a
/// zero-person document.
inline int mock_pose_main(int argc, char** argv) {
  return detail::mock_main(argc, argv, JobKind::EstimatePose, [](const BackendJob& job, const std::set<long>& failing) {
    const auto& p = job.params;
    const std::string source_dir = p.value("source_dir", std::string());
    const std::string prefix = p.value("source_prefix", std::string("pose"));
    int failed = 0;
    for (const auto& r : job.pose) {
      if (failing.count(r.frame)) {
        std::cerr << "frame " << r.frame << ": injected failure\n";
        ++failed;
        continue;
      }
      std::string doc = empty_pose_document();
      const auto src = std::filesystem::path(source_dir) / pose_filename(prefix, r.frame);
      if (!source_dir.empty() && std::filesystem::exists(src)) {
        const auto size = edgemap::png_size(r.image_path);
        const double sw = p.value("source_width", static_cast<double>(size.width));
        const double sh = p.value("source_height", static_cast<double>(size.height));
        doc = detail::rescale_pose_document(util::read_file(src), size.width / sw, size.height / sh);
      }
      util::write_file(r.output_pose_path, doc);
    }
    return failed;
  });
}

}  // namespace gaitkit::backend
