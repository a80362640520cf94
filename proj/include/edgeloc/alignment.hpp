#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "edgeloc/edge_features.hpp"
#include "edgeloc/geometry.hpp"
#include "edgeloc/landmark_selection.hpp"

namespace edgeloc {

struct AlignmentConfig {
  int max_iterations = 50;
  std::size_t min_samples = 30;
  double step_tol = 1e-6;
  double energy_tol = 1e-9;
  double lambda_init = 1e-4;
  double max_translation_jump_m = 1.0;
  double max_rotation_jump_deg = 3.0;
  double max_mean_reproj_px = 3.0;
  double min_information = 1e-4;
  /// Per-label residual weights indexed by LabelId; missing entries are 1.
  std::vector<double> label_weights;

  double weight(LabelId label) const { return label < label_weights.size() ? label_weights[label] : 1.0; }
};

enum class RejectReason { None, Diverged, PoseInconsistent, HighReprojError, TooFewSamples, LowInformation };

std::string_view to_string(RejectReason reason);

/// Why the iteration stopped. Only damping failure counts as divergence.
enum class StopReason { StepTolerance, EnergyTolerance, MaxIterations, DampingFailure, TooFewSamples };

std::string_view to_string(StopReason reason);

/// Per-label fields indexed by LabelId.
using EdgeFieldSet = std::vector<SemanticEdgeField>;

/// Samples are fixed in the prior frame r; the pose being estimated is T^w_c.
struct AlignmentProblem {
  const LandmarkSamples& samples;
  const EdgeFieldSet& fields;
  Pose prior;
  CameraIntrinsics intrinsics;
  Pose initial;
  AlignmentConfig config;

  AlignmentProblem(const LandmarkSamples& s, const EdgeFieldSet& f, const Pose& prior_pose,
                   const CameraIntrinsics& k, const AlignmentConfig& cfg = {})
      : samples(s), fields(f), prior(prior_pose), intrinsics(k), initial(prior_pose), config(cfg) {}
};

struct AlignmentResult {
  Pose pose;
  /// The solve stopped on a stopping rule rather than by damping failure.
  bool converged = false;
  StopReason stop_reason = StopReason::MaxIterations;
  int iterations = 0;
  double final_energy = 0.0;
  /// Final energy over the number of active residuals.
  double mean_reproj_error = 0.0;
  std::size_t inlier_count = 0;
  std::size_t input_samples = 0;
  bool accepted = false;
  RejectReason reject_reason = RejectReason::None;
  /// Smallest eigenvalue of the edge-normal information matrix at the result.
  double min_information = 0.0;
  /// Smallest eigenvalue of the optimizer's J^T J at the result.
  double min_eigen_jtj = 0.0;
  std::vector<std::size_t> active_per_iteration;
  std::vector<double> energy_per_iteration;
};

/// Camera-frame point of a frame-r sample under estimate `pose`:
/// R_c^T (R_r p + t_r - t_c).
Eigen::Vector3d sample_in_camera(const AlignmentProblem& problem, const Pose& pose, const LandmarkSample& sample);

/// V at the reprojection; nothing if the sample is dropped (behind the camera
/// or outside the image).
std::optional<double> residual(const AlignmentProblem& problem, const Pose& pose, const LandmarkSample& sample);

struct EnergyValue {
  double energy = 0.0;
  std::size_t active = 0;
};

/// Weighted sum of squared residuals over active samples.
EnergyValue energy(const AlignmentProblem& problem, const Pose& pose);

using JacobianRow = Eigen::Matrix<double, 1, 6>;

/// d r / d delta for the retraction R <- R Exp(dw), t <- t + dt:
///   [G_u f_x / Z, G_v f_y / Z, -(G_u f_x X + G_v f_y Y) / Z^2] * [-R_c^T | skew(p_c)]
std::optional<JacobianRow> jacobian_row(const AlignmentProblem& problem, const Pose& pose,
                                        const LandmarkSample& sample);

/// Information of the reprojected edges along their image normals. It has the
/// same form as J^T J but with the field gradient replaced by the unit normal
/// of the projected model edge, so it is exactly rank deficient whenever the
/// edges do not constrain all six degrees of freedom.
Eigen::Matrix<double, 6, 6> edge_information(const AlignmentProblem& problem, const Pose& pose);

/// Damped Gauss-Newton on J^T J d = -J^T r, followed by validate().
AlignmentResult solve(const AlignmentProblem& problem);

/// Applies the acceptance gates to a finished solve.
AlignmentResult validate(AlignmentResult result, const Pose& prior, const AlignmentConfig& cfg);

}  // namespace edgeloc
