#pragma once

#include <Eigen/Core>

#include "msf/state.hpp"

namespace msf {

// Discrete error-state transition matrix, D x D. Drift blocks are identity.
// Built from the pre-update nominal state.
Eigen::MatrixXd build_Fx(const StateLayout& layout, const NominalState& state,
                         const ImuSample& u, double dt);

// Noise insertion matrix, D x 12: identity blocks on the velocity, attitude
// and bias rows. Gravity and drift rows carry no process noise.
Eigen::MatrixXd build_Fw(const StateLayout& layout);

// Block-diagonal process noise for one step, 12 x 12, entries sigma^2 * dt^2.
Eigen::Matrix<double, 12, 12> build_Qw(const ProcessNoiseParams& params, double dt);

// Nominal-state integration over one IMU interval: position, velocity and
// attitude advance, biases / gravity / drift poses stay untouched.
void predict_state(NominalState& state, const ImuSample& u, double dt);

// Full prediction: nominal integration plus P <- Fx P Fx' + Fw Qw Fw',
// re-symmetrized. Throws on dt outside (0, 0.1] or non-finite IMU values.
void predict(const StateLayout& layout, NominalState& state, Eigen::MatrixXd& P,
             const ImuSample& u, double dt, const ProcessNoiseParams& params);

// Kalman correction: K = P H' (H P H' + V)^-1, dx = K * innovation,
// P <- (I - K H) P re-symmetrized. Returns dx. Generic in dimensions.
// Throws when the innovation covariance is numerically singular
// (condition estimate above 1e12).
Eigen::VectorXd kalman_correct(Eigen::MatrixXd& P, const Eigen::VectorXd& innovation,
                               const Eigen::MatrixXd& H, const Eigen::VectorXd& noise_var);

// x (+) dx: additive for vector blocks, multiplicative for the attitude and
// drift-attitude quaternions. Shared by injection and by test oracles.
NominalState apply_error(const StateLayout& layout, const NominalState& state,
                         const Eigen::VectorXd& dx);

// Folds dx into the nominal state, zeroes dx and conjugates P by the reset
// Jacobian G (identity except attitude blocks I - skew(dtheta/2)) when
// reset_jacobian is set. Throws when any attitude error exceeds pi/2.
void inject_and_reset(const StateLayout& layout, NominalState& state, Eigen::VectorXd& dx,
                      Eigen::MatrixXd& P, bool reset_jacobian = true);

// Optional per-axis random-walk noise for drift states, variance rate per
// second. Zero (the default) keeps drift states driftless in the model.
struct DriftProcessNoise {
  Eigen::Vector3d pos = Eigen::Vector3d::Zero();    // [m^2/s]
  Eigen::Vector3d theta = Eigen::Vector3d::Zero();  // [rad^2/s]
};

// Filter instance owning the nominal state, covariance and noise
// parameters. Callers serialize access; independent instances are
// unrelated.
class EsEkf {
public:
  EsEkf(StateLayout layout, NominalState initial_state, Eigen::VectorXd initial_cov_diag,
        ProcessNoiseParams process_noise, bool reset_jacobian = true);

  // Stream-level entry point: the first sample pins the clock, later
  // samples integrate over [t_prev, t] with the trapezoid of the two
  // samples. dt is taken from the timestamps.
  void predict_to(const ImuSample& u);

  // One literal prediction step with an explicit dt.
  void predict(const ImuSample& u, double dt);

  // Correction followed by injection and reset. Returns the injected dx.
  Eigen::VectorXd apply_correction(const Eigen::VectorXd& innovation, const Eigen::MatrixXd& H,
                                   const Eigen::VectorXd& noise_var);

  const StateLayout& layout() const { return layout_; }
  const NominalState& state() const { return state_; }
  const Eigen::MatrixXd& covariance() const { return P_; }
  double time() const { return time_; }
  bool has_time() const { return has_time_; }

  void set_drift(int slot, const DriftPose& pose);
  void set_drift_process_noise(int slot, const DriftProcessNoise& noise);

private:
  StateLayout layout_;
  NominalState state_;
  Eigen::MatrixXd P_;
  ProcessNoiseParams process_noise_;
  std::vector<DriftProcessNoise> drift_noise_;
  bool reset_jacobian_;
  double time_ = 0.0;
  bool has_time_ = false;
  ImuSample last_imu_;
};

}  // namespace msf
