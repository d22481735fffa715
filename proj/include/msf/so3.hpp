#pragma once

#include <Eigen/Core>

namespace msf::so3 {

// Hamilton-convention unit quaternion, components ordered (w, x, y, z).
// R{q} rotates body-frame vectors into the world frame. Every producing
// operation renormalizes and flips the sign so that w >= 0.
struct Quat {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  static Quat identity() { return {}; }
  Eigen::Vector3d vec() const { return {x, y, z}; }
  double norm() const;
};

// Unit norm, w >= 0.
Quat canonical(const Quat& q);

// [v]x so that skew(v) * u == v.cross(u).
Eigen::Matrix3d skew(const Eigen::Vector3d& v);

// q{v}: quaternion of the angle-axis vector v (angle = |v|, axis = v/|v|).
// Second-order series below the small-angle threshold.
Quat quat_from_angle_axis(const Eigen::Vector3d& v);

// R{q}, body -> world.
Eigen::Matrix3d quat_to_rotmat(const Quat& q);

// Hamilton product a * b.
Quat quat_multiply(const Quat& a, const Quat& b);

// Conjugate (= inverse for unit quaternions).
Quat quat_inverse(const Quat& q);

// Angle-axis vector of R with magnitude in [0, pi]. Uses a quaternion
// extraction that branches on the dominant diagonal, so it stays stable
// near pi. Throws msf::Error when R is not orthonormal within 1e-6.
Eigen::Vector3d log_vee(const Eigen::Matrix3d& R);

// d(q * dq{theta}) / d(theta) at theta = 0, a 4x3 matrix over (w,x,y,z) rows.
Eigen::Matrix<double, 4, 3> quat_partial_wrt_theta(const Quat& q);

}  // namespace msf::so3
