#include "msf/so3.hpp"

#include <Eigen/LU>
#include <cmath>

#include "msf/error.hpp"

namespace msf::so3 {

namespace {
constexpr double kSmallAngle = 1e-8;
constexpr double kOrthoTol = 1e-6;
}  // namespace

double Quat::norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

Quat canonical(const Quat& q) {
  double n = q.norm();
  double s = (q.w < 0.0) ? -1.0 / n : 1.0 / n;
  return {q.w * s, q.x * s, q.y * s, q.z * s};
}

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(),
      v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return m;
}

Quat quat_from_angle_axis(const Eigen::Vector3d& v) {
  double theta = v.norm();
  double w, k;
  if (theta < kSmallAngle) {
    w = 1.0 - theta * theta / 8.0;
    k = 0.5 - theta * theta / 48.0;
  } else {
    w = std::cos(0.5 * theta);
    k = std::sin(0.5 * theta) / theta;
  }
  return canonical({w, v.x() * k, v.y() * k, v.z() * k});
}

Eigen::Matrix3d quat_to_rotmat(const Quat& qin) {
  Quat q = canonical(qin);
  double w = q.w, x = q.x, y = q.y, z = q.z;
  Eigen::Matrix3d r;
  r << 1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y),
      2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x),
      2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y);
  return r;
}

Quat quat_multiply(const Quat& a, const Quat& b) {
  Quat q;
  q.w = a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z;
  q.x = a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y;
  q.y = a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x;
  q.z = a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w;
  return canonical(q);
}

Quat quat_inverse(const Quat& q) { return canonical({q.w, -q.x, -q.y, -q.z}); }

namespace {

// Branches on trace / dominant diagonal, stable for angles near pi.
Quat rotmat_to_quat(const Eigen::Matrix3d& r) {
  Quat q;
  double t = r.trace();
  if (t > 0.0) {
    double s = std::sqrt(t + 1.0) * 2.0;
    q.w = 0.25 * s;
    q.x = (r(2, 1) - r(1, 2)) / s;
    q.y = (r(0, 2) - r(2, 0)) / s;
    q.z = (r(1, 0) - r(0, 1)) / s;
  } else if (r(0, 0) > r(1, 1) && r(0, 0) > r(2, 2)) {
    double s = std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2)) * 2.0;
    q.w = (r(2, 1) - r(1, 2)) / s;
    q.x = 0.25 * s;
    q.y = (r(0, 1) + r(1, 0)) / s;
    q.z = (r(0, 2) + r(2, 0)) / s;
  } else if (r(1, 1) > r(2, 2)) {
    double s = std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2)) * 2.0;
    q.w = (r(0, 2) - r(2, 0)) / s;
    q.x = (r(0, 1) + r(1, 0)) / s;
    q.y = 0.25 * s;
    q.z = (r(1, 2) + r(2, 1)) / s;
  } else {
    double s = std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1)) * 2.0;
    q.w = (r(1, 0) - r(0, 1)) / s;
    q.x = (r(0, 2) + r(2, 0)) / s;
    q.y = (r(1, 2) + r(2, 1)) / s;
    q.z = 0.25 * s;
  }
  return canonical(q);
}

}  // namespace

Eigen::Vector3d log_vee(const Eigen::Matrix3d& R) {
  double ortho = (R.transpose() * R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (ortho > kOrthoTol || R.determinant() < 0.0) {
    throw Error("log_vee: matrix is not a rotation (orthonormality residual " +
                std::to_string(ortho) + ")");
  }
  Quat q = rotmat_to_quat(R);
  Eigen::Vector3d v = q.vec();
  double n = v.norm();
  if (n < kSmallAngle) {
    return v * (2.0 / q.w) * (1.0 - n * n / (3.0 * q.w * q.w));
  }
  double theta = 2.0 * std::atan2(n, q.w);  // w >= 0 keeps theta in [0, pi]
  return v * (theta / n);
}

Eigen::Matrix<double, 4, 3> quat_partial_wrt_theta(const Quat& q) {
  Eigen::Matrix<double, 4, 3> m;
  m << -q.x, -q.y, -q.z,
      q.w, -q.z, q.y,
      q.z, q.w, -q.x,
      -q.y, q.x, q.w;
  return 0.5 * m;
}

}  // namespace msf::so3
