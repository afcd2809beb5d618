#include "mgfc/calib.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <random>

#include "mgfc/parallel.hpp"

namespace mgfc {

namespace {

using Params = Eigen::Vector4d;  // w_normal_z, w_comp_xy, w_comp_z, threshold

constexpr double kWeightLo = 1e-3;
constexpr double kWeightHi = 1e3;
constexpr double kThresholdLo = -500.0;
constexpr double kThresholdHi = 500.0;

Params clip_to_box(Params p) {
  for (int i = 0; i < 3; ++i) p[i] = std::clamp(p[i], kWeightLo, kWeightHi);
  p[3] = std::clamp(p[3], kThresholdLo, kThresholdHi);
  return p;
}

StiffnessWeights weights_from_params(const Params& p, CompressionTest dir) {
  StiffnessWeights w;
  w.normal = Vec3(1.0, 1.0, p[0]);
  w.compressed = Vec3(p[1], p[1], p[2]);
  w.compression_threshold = p[3];
  w.threshold_direction = dir;
  return w;
}

Params params_from_weights(const StiffnessWeights& w) {
  return Params(w.normal.z(), w.compressed.x(), w.compressed.z(),
                w.compression_threshold);
}

// Nelder-Mead with box projection. Deterministic for a fixed start point.
Params nelder_mead(const Params& start, int max_iters,
                   const std::function<double(const Params&)>& f,
                   double* best_value) {
  constexpr int kDim = 4;
  std::array<Params, kDim + 1> pts;
  std::array<double, kDim + 1> val;
  const Params scale(1.0, 1.0, 1.0, 20.0);
  pts[0] = clip_to_box(start);
  for (int i = 0; i < kDim; ++i) {
    Params p = pts[0];
    p[i] += 0.25 * std::abs(p[i]) + 0.05 * scale[i];
    pts[i + 1] = clip_to_box(p);
  }
  for (int i = 0; i <= kDim; ++i) val[i] = f(pts[i]);

  auto order = [&]() {
    std::array<int, kDim + 1> idx;
    for (int i = 0; i <= kDim; ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return val[a] < val[b]; });
    std::array<Params, kDim + 1> np;
    std::array<double, kDim + 1> nv;
    for (int i = 0; i <= kDim; ++i) {
      np[i] = pts[idx[i]];
      nv[i] = val[idx[i]];
    }
    pts = np;
    val = nv;
  };

  for (int it = 0; it < max_iters; ++it) {
    order();
    if (val[kDim] - val[0] <= 1e-12 * (1.0 + std::abs(val[0]))) break;

    Params centroid = Params::Zero();
    for (int i = 0; i < kDim; ++i) centroid += pts[i];
    centroid /= kDim;

    const Params reflected = clip_to_box(centroid + (centroid - pts[kDim]));
    const double fr = f(reflected);
    if (fr < val[0]) {
      const Params expanded =
          clip_to_box(centroid + 2.0 * (centroid - pts[kDim]));
      const double fe = f(expanded);
      if (fe < fr) {
        pts[kDim] = expanded;
        val[kDim] = fe;
      } else {
        pts[kDim] = reflected;
        val[kDim] = fr;
      }
      continue;
    }
    if (fr < val[kDim - 1]) {
      pts[kDim] = reflected;
      val[kDim] = fr;
      continue;
    }
    const Params contracted =
        clip_to_box(centroid + 0.5 * (pts[kDim] - centroid));
    const double fc = f(contracted);
    if (fc < val[kDim]) {
      pts[kDim] = contracted;
      val[kDim] = fc;
      continue;
    }
    for (int i = 1; i <= kDim; ++i) {
      pts[i] = clip_to_box(pts[0] + 0.5 * (pts[i] - pts[0]));
      val[i] = f(pts[i]);
    }
  }
  order();
  *best_value = val[0];
  return pts[0];
}

}  // namespace

namespace {

// One-shot-adjustment predictor with the gripper matrices assembled once and
// the per-flag-pattern operators cached; mirrors distribute_with_adjustment.
class AdjustedPredictor {
 public:
  AdjustedPredictor(const GripperModel& g, const StiffnessWeights& w)
      : g_(g),
        weights_(w),
        mats_(assemble_distribution_matrices(g)),
        normal_map_(mats_.ring_to_cup *
                    ring_force_operator(
                        mats_, WeightMatrix::uniform(w.normal, g.cup_count()))) {
  }

  Eigen::VectorXd cup_wrenches(const Wrench& tool_wrench) {
    Eigen::VectorXd cups = normal_map_ * tool_wrench.vector();
    uint64_t mask = 0;
    for (int i = 0; i < g_.cup_count(); ++i) {
      if (weights_.is_compressed(cups[6 * i + 5])) mask |= (uint64_t{1} << i);
    }
    if (mask == 0) return cups;
    auto it = adjusted_.find(mask);
    if (it == adjusted_.end()) {
      std::vector<bool> flags(g_.cup_count());
      for (int i = 0; i < g_.cup_count(); ++i) flags[i] = (mask >> i) & 1;
      Eigen::MatrixXd map =
          mats_.ring_to_cup *
          ring_force_operator(mats_, WeightMatrix::from_flags(weights_, flags));
      it = adjusted_.emplace(mask, std::move(map)).first;
    }
    return it->second * tool_wrench.vector();
  }

 private:
  const GripperModel& g_;
  StiffnessWeights weights_;
  GripperMatrices mats_;
  Eigen::MatrixXd normal_map_;
  std::map<uint64_t, Eigen::MatrixXd> adjusted_;
};

}  // namespace

double fit_objective(const std::vector<WrenchSample>& samples,
                     const GripperModel& g, const StiffnessWeights& weights,
                     bool full_wrench, Eigen::VectorXd* per_sample) {
  if (per_sample) per_sample->resize(static_cast<int>(samples.size()));
  AdjustedPredictor predictor(g, weights);
  double total = 0.0;
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const auto& sample = samples[s];
    if (static_cast<int>(sample.cup_wrenches.size()) != g.cup_count()) {
      throw DimensionMismatch("sample cup count does not match the gripper");
    }
    Eigen::VectorXd cups = predictor.cup_wrenches(sample.tool_wrench);
    double err = 0.0;
    for (int i = 0; i < g.cup_count(); ++i) {
      const Vec6 predicted = cups.segment<6>(6 * i);
      const Vec6 measured = sample.cup_wrenches[i].vector();
      if (full_wrench) {
        err += (predicted - measured).norm();
      } else {
        err += (predicted.tail<3>() - measured.tail<3>()).norm();
      }
    }
    if (per_sample) (*per_sample)[static_cast<int>(s)] = err;
    total += err;
  }
  return total;
}

std::vector<WrenchSample> simulate_samples(
    const GripperModel& g, const StiffnessWeights& weights,
    const std::vector<Vec6>& tool_wrenches) {
  std::vector<WrenchSample> out;
  out.reserve(tool_wrenches.size());
  for (const auto& w : tool_wrenches) {
    WrenchSample s;
    s.tool_wrench = Wrench(w);
    LoadDistribution ld = distribute_with_adjustment(s.tool_wrench, g, weights);
    s.cup_wrenches = ld.per_cup_wrench;
    out.push_back(std::move(s));
  }
  return out;
}

FitResult fit_weights(const std::vector<WrenchSample>& samples,
                      const GripperModel& g, const FitOptions& opt) {
  if (samples.size() < 10) {
    throw InsufficientData("fit_weights needs at least 10 samples, got " +
                           std::to_string(samples.size()));
  }
  const CompressionTest dir = g.weights().threshold_direction;
  auto objective = [&](const Params& p) {
    return fit_objective(samples, g, weights_from_params(p, dir),
                         opt.full_wrench);
  };

  // Start set: the gripper's configured weights, the testbed preset, a
  // neutral point, and seeded random points.
  std::vector<Params> starts;
  starts.push_back(clip_to_box(params_from_weights(g.weights())));
  starts.push_back(clip_to_box(params_from_weights(testbed_fitted_weights())));
  starts.push_back(Params(1.0, 1.0, 1.0, 0.0));
  const int n_starts = std::max(opt.starts, 3);
  for (int i = static_cast<int>(starts.size()); i < n_starts; ++i) {
    std::mt19937_64 rng(opt.seed * 0x9E3779B97F4A7C15ULL + 1000003ULL * i);
    std::uniform_real_distribution<double> logw(-1.5, 1.5);
    std::uniform_real_distribution<double> thr(-150.0, 50.0);
    Params p;
    p[0] = std::pow(10.0, logw(rng));
    p[1] = std::pow(10.0, logw(rng));
    p[2] = std::pow(10.0, logw(rng));
    p[3] = thr(rng);
    starts.push_back(clip_to_box(p));
  }

  std::vector<double> start_obj(starts.size());
  std::vector<Params> best_pts(starts.size());
  std::vector<double> best_vals(starts.size());
  par::for_index(static_cast<std::ptrdiff_t>(starts.size()),
                 ExecMode::Parallel, [&](std::ptrdiff_t i) {
                   start_obj[i] = objective(starts[i]);
                   best_pts[i] = nelder_mead(starts[i],
                                             opt.max_iters_per_start,
                                             objective, &best_vals[i]);
                 });

  int winner = 0;
  for (std::size_t i = 1; i < starts.size(); ++i) {
    if (best_vals[i] < best_vals[winner]) winner = static_cast<int>(i);
  }
  const double probe_lo = *std::min_element(start_obj.begin(), start_obj.end());
  const double probe_hi = *std::max_element(start_obj.begin(), start_obj.end());

  FitResult res;
  res.weights = weights_from_params(best_pts[winner], dir);
  res.degenerate = probe_hi - probe_lo <= 1e-10 * (1.0 + std::abs(probe_lo));
  res.objective = fit_objective(samples, g, res.weights, opt.full_wrench,
                                &res.per_sample_residuals);
  return res;
}

}  // namespace mgfc
