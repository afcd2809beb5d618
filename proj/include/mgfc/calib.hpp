#pragma once

#include <cstdint>
#include <vector>

#include "mgfc/load_dist.hpp"

namespace mgfc {

// One synchronized snapshot: the base-sensor total wrench plus the per-cup
// sensor wrenches, all in their own frames.
struct WrenchSample {
  Wrench tool_wrench;
  std::vector<Wrench> cup_wrenches;
};

struct FitOptions {
  std::uint64_t seed = 0;
  int starts = 16;
  int max_iters_per_start = 400;
  bool full_wrench = false;  // default objective uses force components only
};

struct FitResult {
  StiffnessWeights weights;
  double objective = 0.0;
  bool degenerate = false;  // objective flat across probe points
  Eigen::VectorXd per_sample_residuals;
};

// Fits (w_normal_z, w_compressed_xy, w_compressed_z, f_z_threshold) with
// w_normal_xy fixed at 1, by seeded multi-start Nelder-Mead over the
// one-shot-adjustment predictor. Throws InsufficientData below 10 samples.
FitResult fit_weights(const std::vector<WrenchSample>& samples,
                      const GripperModel& g, const FitOptions& opt = {});

// Prediction error of a candidate parameter set over the dataset; the same
// objective the fit minimizes.
double fit_objective(const std::vector<WrenchSample>& samples,
                     const GripperModel& g, const StiffnessWeights& weights,
                     bool full_wrench = false,
                     Eigen::VectorXd* per_sample = nullptr);

// Model-generated dataset: distributes each tool wrench with the given
// weights and records the resulting per-cup wrenches as the measurements.
std::vector<WrenchSample> simulate_samples(
    const GripperModel& g, const StiffnessWeights& weights,
    const std::vector<Vec6>& tool_wrenches);

}  // namespace mgfc
