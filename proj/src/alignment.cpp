#include "edgeloc/alignment.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace edgeloc {

namespace {

constexpr int kReorthonormalizeInterval = 100;
constexpr double kMaxLambda = 1e16;

using Matrix6 = Eigen::Matrix<double, 6, 6>;
using Vector6d = Eigen::Matrix<double, 6, 1>;

const SemanticEdgeField& field_for(const AlignmentProblem& problem, LabelId label) {
  if (label >= problem.fields.size()) throw std::invalid_argument("no edge field for sample label");
  return problem.fields[label];
}

struct Linearization {
  double energy = 0.0;
  std::size_t active = 0;
  Matrix6 hessian = Matrix6::Zero();
  Vector6d gradient = Vector6d::Zero();
};

// Fixed iteration order keeps the reduction bit-reproducible.
Linearization linearize(const AlignmentProblem& problem, const Pose& pose) {
  Linearization lin;
  const CameraIntrinsics& k = problem.intrinsics;
  for (std::size_t l = 0; l < problem.samples.by_label.size(); ++l) {
    const auto& samples = problem.samples.by_label[l];
    if (samples.empty()) continue;
    const SemanticEdgeField& field = field_for(problem, l);
    const double w = problem.config.weight(l);
    for (const LandmarkSample& s : samples) {
      const Eigen::Vector3d pc = sample_in_camera(problem, pose, s);
      Eigen::Vector2d uv;
      if (!try_project(pc, k, uv) || !field.contains(uv.x(), uv.y())) continue;
      const FieldSample f = sample_field(field, uv.x(), uv.y());
      const double iz = 1.0 / pc.z();
      const Eigen::RowVector3d dr_dp(f.grad_u * k.fx * iz, f.grad_v * k.fy * iz,
                                     -(f.grad_u * k.fx * pc.x() + f.grad_v * k.fy * pc.y()) * iz * iz);
      JacobianRow j;
      j.head<3>() = -dr_dp * pose.rotation.transpose();
      j.tail<3>() = dr_dp * skew(pc);
      lin.energy += w * f.value * f.value;
      lin.hessian.noalias() += w * j.transpose() * j;
      lin.gradient.noalias() += w * j.transpose() * f.value;
      ++lin.active;
    }
  }
  return lin;
}

// Marquardt-style scaling that is invariant to rotations of the world frame:
// each 3x3 block is damped by its mean diagonal.
Matrix6 damping_matrix(const Matrix6& h) {
  Matrix6 d = Matrix6::Zero();
  const double scale = std::max(h.trace() / 6.0, 1e-12);
  const double t = std::max(h.topLeftCorner<3, 3>().trace() / 3.0, 1e-9 * scale);
  const double r = std::max(h.bottomRightCorner<3, 3>().trace() / 3.0, 1e-9 * scale);
  d.topLeftCorner<3, 3>().diagonal().setConstant(t);
  d.bottomRightCorner<3, 3>().diagonal().setConstant(r);
  return d;
}

double min_eigenvalue(const Matrix6& m) {
  Eigen::SelfAdjointEigenSolver<Matrix6> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace

std::string_view to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::None: return "none";
    case RejectReason::Diverged: return "diverged";
    case RejectReason::PoseInconsistent: return "pose-inconsistent";
    case RejectReason::HighReprojError: return "high-reproj-error";
    case RejectReason::TooFewSamples: return "too-few-samples";
    case RejectReason::LowInformation: return "low-information";
  }
  return "unknown";
}

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::StepTolerance: return "step-tolerance";
    case StopReason::EnergyTolerance: return "energy-tolerance";
    case StopReason::MaxIterations: return "max-iterations";
    case StopReason::DampingFailure: return "damping-failure";
    case StopReason::TooFewSamples: return "too-few-samples";
  }
  return "unknown";
}

Eigen::Vector3d sample_in_camera(const AlignmentProblem& problem, const Pose& pose, const LandmarkSample& sample) {
  const Eigen::Vector3d world = problem.prior.rotation * sample.point + problem.prior.translation;
  return pose.rotation.transpose() * (world - pose.translation);
}

std::optional<double> residual(const AlignmentProblem& problem, const Pose& pose, const LandmarkSample& sample) {
  const SemanticEdgeField& field = field_for(problem, sample.label);
  const Eigen::Vector3d pc = sample_in_camera(problem, pose, sample);
  Eigen::Vector2d uv;
  if (!try_project(pc, problem.intrinsics, uv) || !field.contains(uv.x(), uv.y())) return std::nullopt;
  return sample_field(field, uv.x(), uv.y()).value;
}

EnergyValue energy(const AlignmentProblem& problem, const Pose& pose) {
  EnergyValue e;
  for (std::size_t l = 0; l < problem.samples.by_label.size(); ++l) {
    const double w = problem.config.weight(l);
    for (const LandmarkSample& s : problem.samples.by_label[l]) {
      const auto r = residual(problem, pose, s);
      if (!r) continue;
      e.energy += w * *r * *r;
      ++e.active;
    }
  }
  return e;
}

std::optional<JacobianRow> jacobian_row(const AlignmentProblem& problem, const Pose& pose,
                                        const LandmarkSample& sample) {
  const SemanticEdgeField& field = field_for(problem, sample.label);
  const CameraIntrinsics& k = problem.intrinsics;
  const Eigen::Vector3d pc = sample_in_camera(problem, pose, sample);
  Eigen::Vector2d uv;
  if (!try_project(pc, k, uv) || !field.contains(uv.x(), uv.y())) return std::nullopt;
  const FieldSample f = sample_field(field, uv.x(), uv.y());
  const double iz = 1.0 / pc.z();
  const Eigen::RowVector3d dr_dp(f.grad_u * k.fx * iz, f.grad_v * k.fy * iz,
                                 -(f.grad_u * k.fx * pc.x() + f.grad_v * k.fy * pc.y()) * iz * iz);
  Eigen::Matrix<double, 3, 6> dp_dxi;
  dp_dxi.leftCols<3>() = -pose.rotation.transpose();
  dp_dxi.rightCols<3>() = skew(pc);
  return JacobianRow(dr_dp * dp_dxi);
}

Eigen::Matrix<double, 6, 6> edge_information(const AlignmentProblem& problem, const Pose& pose) {
  Matrix6 info = Matrix6::Zero();
  const CameraIntrinsics& k = problem.intrinsics;
  const Matrix3<double> r_cr = pose.rotation.transpose() * problem.prior.rotation;
  for (std::size_t l = 0; l < problem.samples.by_label.size(); ++l) {
    const auto& samples = problem.samples.by_label[l];
    if (samples.empty()) continue;
    const SemanticEdgeField& field = field_for(problem, l);
    const double w = problem.config.weight(l);
    for (const LandmarkSample& s : samples) {
      const Eigen::Vector3d pc = sample_in_camera(problem, pose, s);
      Eigen::Vector2d uv;
      if (!try_project(pc, k, uv) || !field.contains(uv.x(), uv.y())) continue;
      const double iz = 1.0 / pc.z();
      Eigen::Matrix<double, 2, 3> dpi;
      dpi << k.fx * iz, 0.0, -k.fx * pc.x() * iz * iz,
             0.0, k.fy * iz, -k.fy * pc.y() * iz * iz;
      const Eigen::Vector2d dir = dpi * (r_cr * s.tangent);
      const double len = dir.norm();
      if (len < 1e-12) continue;
      const Eigen::RowVector2d normal(-dir.y() / len, dir.x() / len);
      const Eigen::RowVector3d dn = normal * dpi;
      JacobianRow j;
      j.head<3>() = -dn * pose.rotation.transpose();
      j.tail<3>() = dn * skew(pc);
      info.noalias() += w * j.transpose() * j;
    }
  }
  return info;
}

AlignmentResult solve(const AlignmentProblem& problem) {
  const AlignmentConfig& cfg = problem.config;
  AlignmentResult result;
  result.pose = problem.initial;
  result.input_samples = problem.samples.size();

  Pose pose = problem.initial;
  Linearization lin = linearize(problem, pose);
  result.active_per_iteration.push_back(lin.active);
  result.energy_per_iteration.push_back(lin.energy);

  const auto finish = [&](StopReason stop) {
    result.pose = pose;
    result.stop_reason = stop;
    result.converged = stop != StopReason::DampingFailure && stop != StopReason::TooFewSamples;
    result.final_energy = lin.energy;
    result.inlier_count = lin.active;
    result.mean_reproj_error = lin.active > 0 ? lin.energy / static_cast<double>(lin.active) : 0.0;
    result.min_eigen_jtj = min_eigenvalue(lin.hessian);
    result.min_information = min_eigenvalue(edge_information(problem, pose));
  };

  if (lin.active < cfg.min_samples) {
    finish(StopReason::TooFewSamples);
    result.reject_reason = RejectReason::TooFewSamples;
    return result;
  }

  double lambda = cfg.lambda_init;
  int updates = 0;
  StopReason stop = StopReason::MaxIterations;
  for (int it = 0; it < cfg.max_iterations; ++it) {
    result.iterations = it + 1;
    const Matrix6 a = lin.hessian + lambda * damping_matrix(lin.hessian);
    const Eigen::LDLT<Matrix6> ldlt(a);
    const Vector6d delta = ldlt.solve(-lin.gradient);
    if (ldlt.info() != Eigen::Success || !delta.allFinite()) {
      lambda *= 10.0;
      if (lambda > kMaxLambda) {
        stop = StopReason::DampingFailure;
        break;
      }
      continue;
    }
    if (delta.norm() < cfg.step_tol) {
      stop = StopReason::StepTolerance;
      break;
    }
    Pose candidate = retract(pose, Twist(delta));
    if ((updates + 1) % kReorthonormalizeInterval == 0) candidate.rotation = orthonormalize(candidate.rotation);
    Linearization next = linearize(problem, candidate);
    if (next.active >= cfg.min_samples && next.energy <= lin.energy) {
      const double decrease = lin.energy - next.energy;
      pose = candidate;
      lin = std::move(next);
      ++updates;
      result.active_per_iteration.push_back(lin.active);
      result.energy_per_iteration.push_back(lin.energy);
      lambda = std::max(lambda / 10.0, 1e-12);
      if (decrease <= cfg.energy_tol * std::max(lin.energy + decrease, 1e-300)) {
        stop = StopReason::EnergyTolerance;
        break;
      }
    } else {
      lambda *= 10.0;
      if (lambda > kMaxLambda) {
        stop = StopReason::DampingFailure;
        break;
      }
    }
  }

  finish(stop);
  return validate(std::move(result), problem.prior, cfg);
}

AlignmentResult validate(AlignmentResult result, const Pose& prior, const AlignmentConfig& cfg) {
  result.accepted = false;
  if (result.reject_reason == RejectReason::TooFewSamples) return result;
  if (result.inlier_count < cfg.min_samples) {
    result.reject_reason = RejectReason::TooFewSamples;
    return result;
  }
  if (!(result.min_information >= cfg.min_information)) {
    result.reject_reason = RejectReason::LowInformation;
    return result;
  }
  if (!result.converged) {
    result.reject_reason = RejectReason::Diverged;
    return result;
  }
  const double jump = (result.pose.translation - prior.translation).norm();
  const double turn = rotation_distance(result.pose, prior) * 180.0 / std::numbers::pi;
  if (jump > cfg.max_translation_jump_m || turn > cfg.max_rotation_jump_deg) {
    result.reject_reason = RejectReason::PoseInconsistent;
    return result;
  }
  if (result.mean_reproj_error > cfg.max_mean_reproj_px) {
    result.reject_reason = RejectReason::HighReprojError;
    return result;
  }
  result.reject_reason = RejectReason::None;
  result.accepted = true;
  return result;
}

}  // namespace edgeloc
