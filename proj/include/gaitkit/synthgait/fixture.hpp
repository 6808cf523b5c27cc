#pragma once

#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

#include "gaitkit/backend/mock.hpp"
#include "gaitkit/edgemap/png_io.hpp"
#include "gaitkit/gaitcycle/events.hpp"
#include "gaitkit/kinematics/angles_io.hpp"
#include "gaitkit/synthgait/corrupt.hpp"
#include "gaitkit/synthgait/model.hpp"
#include "gaitkit/synthgait/render.hpp"
#include "gaitkit/util/fs.hpp"
#include "gaitkit/util/parallel.hpp"

namespace gaitkit::synthgait {

inline constexpr std::string_view kFixturePosePrefix = "pose";

struct FixtureOptions {
  GaitModel model{};
  std::size_t n_frames = 180;
  double sample_rate = kDefaultSampleRate;
  std::uint64_t seed = 0;
  std::map<std::string, CorruptionSpec> variants;  // name -> corruption applied to the truth
  bool render_frames = false;
  std::size_t workers = 1;
};

struct Fixture {
  SynthOutput truth;
  std::map<std::string, CorruptionLog> logs;
};

/// Layout under `dir`:
///   model.json, truth_angles.csv, events.csv
///   truth/pose_<frame>_keypoints.json
///   <variant>/pose_<frame>_keypoints.json and <variant>.corruption.json
///   frames/frame_<frame>.png when rendering is requested
/// Variant i is corrupted with seed `seed + i` in name order.
inline Fixture write_fixture(const std::filesystem::path& dir, const FixtureOptions& opt) {
  Fixture fx;
  fx.truth = forward_kinematics(opt.model, opt.n_frames, opt.sample_rate);
  const ImageSize size = opt.model.image_size;
  util::write_file(dir / "model.json", model_json(opt.model).dump(2) + "\n");
  util::write_file(dir / "truth_angles.csv", kinematics::format_angles_csv(fx.truth.angles));
  util::write_file(dir / "events.csv", gaitcycle::format_events(fx.truth.events));
  backend::mock_pose_backend(fx.truth.trajectories, {}, opt.seed, dir / "truth", kFixturePosePrefix, size);

  std::uint64_t k = 0;
  for (const auto& [name, spec] : opt.variants) {
    auto log = backend::mock_pose_backend(fx.truth.trajectories, spec, opt.seed + k++, dir / name, kFixturePosePrefix, size);
    nlohmann::json doc = {{"spec", spec_json(spec)}, {"log", log_json(log)}};
    util::write_file(dir / (name + ".corruption.json"), doc.dump(2) + "\n");
    fx.logs.emplace(name, std::move(log));
  }

  if (opt.render_frames) {
    const auto& traj = fx.truth.trajectories;
    util::parallel_for(traj.length, opt.workers, [&](std::size_t t) {
      edgemap::write_png(dir / "frames" / ("frame_" + util::zero_pad(traj.frame_at(t), 12) + ".png"),
                         render_stick_figure(traj, t, size));
    });
  }
  return fx;
}

}  // namespace gaitkit::synthgait
