#pragma once

#include <cstddef>

#include "gaitkit/core/error.hpp"

namespace gaitkit::refine {

enum class GateMode { PerJoint, PerFrame };

struct RefineConfig {
  double confidence_threshold = 0.50;
  int butterworth_order = 4;
  double cutoff_hz = 6.0;
  bool zero_phase = true;
  std::size_t max_interp_gap = 15;  // frames
  GateMode gate_mode = GateMode::PerJoint;
  bool filter_angles = false;
  double outlier_px = 20.0;         // residual against a 5-frame median
  double swap_noise_floor_px = 5.0; // minimum ankle separation to seed swap tracking
  std::size_t arm_cue_window = 31;  // frames
  double arm_cue_margin = 0.3;      // |correlation| needed to trust the arm-leg cue

  void validate(double sample_rate) const {
    if (!(confidence_threshold >= 0.0 && confidence_threshold <= 1.0)) {
      throw Error(ErrorCode::Config, "confidence threshold must lie in [0,1]");
    }
    if (butterworth_order <= 0 || butterworth_order % 2 != 0) {
      throw Error(ErrorCode::Config, "butterworth order must be a positive even integer");
    }
    if (!(cutoff_hz > 0.0) || !(cutoff_hz < sample_rate / 2.0)) {
      throw Error(ErrorCode::Config, "cutoff must lie strictly between 0 and the Nyquist frequency");
    }
    if (!(outlier_px > 0.0)) throw Error(ErrorCode::Config, "outlier threshold must be positive");
    if (arm_cue_window < 3) throw Error(ErrorCode::Config, "arm cue window must be at least 3 frames");
  }
};

}  // namespace gaitkit::refine
