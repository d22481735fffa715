#include "msf/filter.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "msf/error.hpp"

namespace msf {

namespace {
constexpr double kMaxDt = 0.1;
constexpr double kMaxCondition = 1e12;
constexpr double kMaxInjectAngle = M_PI / 2.0;

void symmetrize(Eigen::MatrixXd& P) { P = 0.5 * (P + P.transpose()).eval(); }
}  // namespace

Eigen::MatrixXd build_Fx(const StateLayout& layout, const NominalState& state,
                         const ImuSample& u, double dt) {
  const int d = layout.dim();
  Eigen::MatrixXd F = Eigen::MatrixXd::Identity(d, d);
  const Eigen::Matrix3d R = so3::quat_to_rotmat(state.q);
  const Eigen::Matrix3d A = so3::skew(u.accel - state.accel_bias) * dt;
  const Eigen::Vector3d omega = (u.gyro - state.gyro_bias) * dt;

  F.block<3, 3>(StateLayout::kPos, StateLayout::kVel) = Eigen::Matrix3d::Identity() * dt;
  F.block<3, 3>(StateLayout::kVel, StateLayout::kAtt) = -R * A;
  F.block<3, 3>(StateLayout::kVel, StateLayout::kAccBias) = -R * dt;
  F.block<3, 3>(StateLayout::kVel, StateLayout::kGravity) = Eigen::Matrix3d::Identity() * dt;
  F.block<3, 3>(StateLayout::kAtt, StateLayout::kAtt) =
      so3::quat_to_rotmat(so3::quat_from_angle_axis(omega)).transpose();
  F.block<3, 3>(StateLayout::kAtt, StateLayout::kGyroBias) = -Eigen::Matrix3d::Identity() * dt;
  return F;
}

Eigen::MatrixXd build_Fw(const StateLayout& layout) {
  const int d = layout.dim();
  Eigen::MatrixXd Fw = Eigen::MatrixXd::Zero(d, 12);
  Fw.block<3, 3>(StateLayout::kVel, 0) = Eigen::Matrix3d::Identity();
  Fw.block<3, 3>(StateLayout::kAtt, 3) = Eigen::Matrix3d::Identity();
  Fw.block<3, 3>(StateLayout::kAccBias, 6) = Eigen::Matrix3d::Identity();
  Fw.block<3, 3>(StateLayout::kGyroBias, 9) = Eigen::Matrix3d::Identity();
  return Fw;
}

Eigen::Matrix<double, 12, 12> build_Qw(const ProcessNoiseParams& params, double dt) {
  if (dt <= 0.0) throw Error("build_Qw: dt must be > 0");
  Eigen::Matrix<double, 12, 12> Q = Eigen::Matrix<double, 12, 12>::Zero();
  const double dt2 = dt * dt;
  Q.diagonal().segment<3>(0) = params.sigma_v2 * dt2;
  Q.diagonal().segment<3>(3) = params.sigma_theta2 * dt2;
  Q.diagonal().segment<3>(6) = params.sigma_a2 * dt2;
  Q.diagonal().segment<3>(9) = params.sigma_w2 * dt2;
  return Q;
}

void predict_state(NominalState& state, const ImuSample& u, double dt) {
  const Eigen::Matrix3d R = so3::quat_to_rotmat(state.q);
  const Eigen::Vector3d a_world = R * (u.accel - state.accel_bias) + state.gravity;
  state.p += state.v * dt + 0.5 * a_world * dt * dt;
  state.v += a_world * dt;
  state.q = so3::quat_multiply(state.q, so3::quat_from_angle_axis((u.gyro - state.gyro_bias) * dt));
}

void predict(const StateLayout& layout, NominalState& state, Eigen::MatrixXd& P,
             const ImuSample& u, double dt, const ProcessNoiseParams& params) {
  if (!(dt > 0.0) || dt > kMaxDt) {
    throw Error("predict: dt " + std::to_string(dt) + " outside (0, 0.1] (clock fault)");
  }
  if (!u.accel.allFinite() || !u.gyro.allFinite()) {
    throw Error("predict: non-finite IMU sample");
  }
  const Eigen::MatrixXd Fx = build_Fx(layout, state, u, dt);
  const Eigen::MatrixXd Fw = build_Fw(layout);
  predict_state(state, u, dt);
  P = Fx * P * Fx.transpose() + Fw * build_Qw(params, dt) * Fw.transpose();
  symmetrize(P);
}

Eigen::VectorXd kalman_correct(Eigen::MatrixXd& P, const Eigen::VectorXd& innovation,
                               const Eigen::MatrixXd& H, const Eigen::VectorXd& noise_var) {
  const int d = static_cast<int>(P.rows());
  const int m = static_cast<int>(H.rows());
  if (H.cols() != d || innovation.size() != m || noise_var.size() != m) {
    throw Error("kalman_correct: inconsistent dimensions");
  }
  Eigen::MatrixXd S = H * P * H.transpose();
  S.diagonal() += noise_var;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
  const double lmin = eig.eigenvalues().minCoeff();
  const double lmax = eig.eigenvalues().maxCoeff();
  if (lmin <= 0.0 || lmax / lmin > kMaxCondition) {
    throw Error("kalman_correct: innovation covariance numerically singular");
  }

  const Eigen::MatrixXd K = P * H.transpose() * S.inverse();
  Eigen::VectorXd dx = K * innovation;
  P = (Eigen::MatrixXd::Identity(d, d) - K * H) * P;
  symmetrize(P);
  return dx;
}

NominalState apply_error(const StateLayout& layout, const NominalState& state,
                         const Eigen::VectorXd& dx) {
  if (dx.size() != layout.dim()) throw Error("apply_error: dx dimension mismatch");
  NominalState out = state;
  out.p += dx.segment<3>(StateLayout::kPos);
  out.v += dx.segment<3>(StateLayout::kVel);
  out.q = so3::quat_multiply(state.q, so3::quat_from_angle_axis(dx.segment<3>(StateLayout::kAtt)));
  out.accel_bias += dx.segment<3>(StateLayout::kAccBias);
  out.gyro_bias += dx.segment<3>(StateLayout::kGyroBias);
  out.gravity += dx.segment<3>(StateLayout::kGravity);
  for (int i = 0; i < layout.drift_count(); ++i) {
    out.drift[i].p += dx.segment<3>(layout.drift_pos(i));
    out.drift[i].q = so3::quat_multiply(
        state.drift[i].q, so3::quat_from_angle_axis(dx.segment<3>(layout.drift_att(i))));
  }
  return out;
}

void inject_and_reset(const StateLayout& layout, NominalState& state, Eigen::VectorXd& dx,
                      Eigen::MatrixXd& P, bool reset_jacobian) {
  if (!dx.allFinite()) throw Error("inject_and_reset: non-finite error state");
  const Eigen::Vector3d dtheta = dx.segment<3>(StateLayout::kAtt);
  if (dtheta.norm() > kMaxInjectAngle) {
    throw Error("inject_and_reset: attitude error exceeds pi/2 (filter divergence)");
  }
  for (int i = 0; i < layout.drift_count(); ++i) {
    if (dx.segment<3>(layout.drift_att(i)).norm() > kMaxInjectAngle) {
      throw Error("inject_and_reset: drift attitude error exceeds pi/2 (filter divergence)");
    }
  }

  state = apply_error(layout, state, dx);

  if (reset_jacobian) {
    const int d = layout.dim();
    Eigen::MatrixXd G = Eigen::MatrixXd::Identity(d, d);
    G.block<3, 3>(StateLayout::kAtt, StateLayout::kAtt) =
        Eigen::Matrix3d::Identity() - so3::skew(0.5 * dtheta);
    for (int i = 0; i < layout.drift_count(); ++i) {
      G.block<3, 3>(layout.drift_att(i), layout.drift_att(i)) =
          Eigen::Matrix3d::Identity() - so3::skew(0.5 * dx.segment<3>(layout.drift_att(i)));
    }
    P = G * P * G.transpose();
    symmetrize(P);
  }
  dx.setZero();
}

EsEkf::EsEkf(StateLayout layout, NominalState initial_state, Eigen::VectorXd initial_cov_diag,
             ProcessNoiseParams process_noise, bool reset_jacobian)
    : layout_(std::move(layout)),
      state_(std::move(initial_state)),
      process_noise_(process_noise),
      drift_noise_(layout_.drift_count()),
      reset_jacobian_(reset_jacobian) {
  process_noise_.validate();
  if (static_cast<int>(state_.drift.size()) != layout_.drift_count()) {
    throw Error("EsEkf: drift pose count does not match layout");
  }
  if (initial_cov_diag.size() != layout_.dim()) {
    throw Error("EsEkf: initial covariance diagonal has wrong dimension");
  }
  P_ = initial_cov_diag.asDiagonal();
}

void EsEkf::predict_to(const ImuSample& u) {
  if (!has_time_) {
    time_ = u.t;
    last_imu_ = u;
    has_time_ = true;
    return;
  }
  const double dt = u.t - time_;
  if (!(dt > 0.0)) {
    throw Error("predict_to: IMU timestamps must be strictly increasing");
  }
  ImuSample mid = u;  // trapezoid of the bracketing samples
  mid.accel = 0.5 * (last_imu_.accel + u.accel);
  mid.gyro = 0.5 * (last_imu_.gyro + u.gyro);
  predict(mid, dt);
  time_ = u.t;
  last_imu_ = u;
}

void EsEkf::predict(const ImuSample& u, double dt) {
  msf::predict(layout_, state_, P_, u, dt, process_noise_);
  for (int i = 0; i < layout_.drift_count(); ++i) {
    P_.diagonal().segment<3>(layout_.drift_pos(i)) += drift_noise_[i].pos * dt;
    P_.diagonal().segment<3>(layout_.drift_att(i)) += drift_noise_[i].theta * dt;
  }
}

Eigen::VectorXd EsEkf::apply_correction(const Eigen::VectorXd& innovation,
                                        const Eigen::MatrixXd& H,
                                        const Eigen::VectorXd& noise_var) {
  Eigen::VectorXd dx = kalman_correct(P_, innovation, H, noise_var);
  Eigen::VectorXd injected = dx;
  inject_and_reset(layout_, state_, dx, P_, reset_jacobian_);
  return injected;
}

void EsEkf::set_drift(int slot, const DriftPose& pose) {
  if (slot < 0 || slot >= layout_.drift_count()) throw Error("set_drift: slot out of range");
  state_.drift[slot] = pose;
  state_.drift[slot].q = so3::canonical(state_.drift[slot].q);
}

void EsEkf::set_drift_process_noise(int slot, const DriftProcessNoise& noise) {
  if (slot < 0 || slot >= layout_.drift_count()) {
    throw Error("set_drift_process_noise: slot out of range");
  }
  drift_noise_[slot] = noise;
}

}  // namespace msf
