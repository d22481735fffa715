#include "msf/sim.hpp"

#include <cmath>
#include <memory>
#include <random>

#include "msf/error.hpp"

namespace msf::sim {

const char* to_string(TrajectoryKind k) {
  switch (k) {
    case TrajectoryKind::hover: return "hover";
    case TrajectoryKind::line: return "line";
    case TrajectoryKind::circle: return "circle";
    case TrajectoryKind::lissajous: return "lissajous";
    case TrajectoryKind::waypoint_spline: return "waypoint-spline";
  }
  return "?";
}

const char* to_string(YawProfile p) {
  switch (p) {
    case YawProfile::fixed: return "fixed";
    case YawProfile::tangent: return "tangent";
    case YawProfile::sinusoid: return "sinusoid";
  }
  return "?";
}

const char* to_string(DriftModel m) {
  switch (m) {
    case DriftModel::none: return "none";
    case DriftModel::constant_offset: return "constant-offset";
    case DriftModel::random_walk: return "random-walk";
  }
  return "?";
}

namespace {

struct Kinematics {
  Eigen::Vector3d p, v, a;
};

// Natural cubic spline through waypoints, C^2 with analytic derivatives.
class CubicSpline {
public:
  CubicSpline(std::vector<double> knots, std::vector<Eigen::Vector3d> values)
      : t_(std::move(knots)), y_(std::move(values)) {
    const int n = static_cast<int>(t_.size());
    m_.assign(n, Eigen::Vector3d::Zero());
    if (n < 3) return;
    // tridiagonal solve for second derivatives, natural ends
    std::vector<double> h(n - 1);
    for (int i = 0; i + 1 < n; ++i) h[i] = t_[i + 1] - t_[i];
    std::vector<double> diag(n, 2.0), sub(n, 0.0);
    std::vector<Eigen::Vector3d> rhs(n, Eigen::Vector3d::Zero());
    for (int i = 1; i + 1 < n; ++i) {
      diag[i] = 2.0 * (h[i - 1] + h[i]);
      rhs[i] = 6.0 * ((y_[i + 1] - y_[i]) / h[i] - (y_[i] - y_[i - 1]) / h[i - 1]);
    }
    // forward elimination over interior rows
    for (int i = 2; i + 1 < n; ++i) {
      double w = h[i - 1] / diag[i - 1];
      diag[i] -= w * h[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    for (int i = n - 2; i >= 1; --i) {
      Eigen::Vector3d upper = (i + 2 < n) ? (h[i] * m_[i + 1]).eval() : Eigen::Vector3d::Zero();
      m_[i] = (rhs[i] - upper) / diag[i];
    }
  }

  Kinematics eval(double t) const {
    const int n = static_cast<int>(t_.size());
    int i = 0;
    while (i + 2 < n && t > t_[i + 1]) ++i;
    const double h = t_[i + 1] - t_[i];
    const double tau = t - t_[i];
    const Eigen::Vector3d c = m_[i] / 2.0;
    const Eigen::Vector3d d = (m_[i + 1] - m_[i]) / (6.0 * h);
    const Eigen::Vector3d b = (y_[i + 1] - y_[i]) / h - h * (2.0 * m_[i] + m_[i + 1]) / 6.0;
    Kinematics k;
    k.p = y_[i] + b * tau + c * tau * tau + d * tau * tau * tau;
    k.v = b + 2.0 * c * tau + 3.0 * d * tau * tau;
    k.a = 2.0 * c + 6.0 * d * tau;
    return k;
  }

private:
  std::vector<double> t_;
  std::vector<Eigen::Vector3d> y_;
  std::vector<Eigen::Vector3d> m_;
};

Kinematics eval_position(const TrajectoryProfile& prof, const CubicSpline* spline, double t) {
  Kinematics k;
  const double w = 2.0 * M_PI / prof.period;
  const double A = prof.amplitude;
  switch (prof.kind) {
    case TrajectoryKind::hover:
      k.p = prof.origin;
      k.v.setZero();
      k.a.setZero();
      break;
    case TrajectoryKind::line:
      k.p = prof.origin + Eigen::Vector3d(A * std::sin(w * t), 0, 0);
      k.v = Eigen::Vector3d(A * w * std::cos(w * t), 0, 0);
      k.a = Eigen::Vector3d(-A * w * w * std::sin(w * t), 0, 0);
      break;
    case TrajectoryKind::circle:
      k.p = prof.origin + A * Eigen::Vector3d(std::cos(w * t) - 1.0, std::sin(w * t), 0);
      k.v = A * w * Eigen::Vector3d(-std::sin(w * t), std::cos(w * t), 0);
      k.a = A * w * w * Eigen::Vector3d(-std::cos(w * t), -std::sin(w * t), 0);
      break;
    case TrajectoryKind::lissajous: {
      const double w2 = 2.0 * w, w3 = 3.0 * w;
      k.p = prof.origin + Eigen::Vector3d(A * std::sin(w * t),
                                          0.8 * A * std::sin(w2 * t + M_PI / 3.0),
                                          0.25 * A * std::sin(w3 * t));
      k.v = Eigen::Vector3d(A * w * std::cos(w * t), 0.8 * A * w2 * std::cos(w2 * t + M_PI / 3.0),
                            0.25 * A * w3 * std::cos(w3 * t));
      k.a = Eigen::Vector3d(-A * w * w * std::sin(w * t),
                            -0.8 * A * w2 * w2 * std::sin(w2 * t + M_PI / 3.0),
                            -0.25 * A * w3 * w3 * std::sin(w3 * t));
      break;
    }
    case TrajectoryKind::waypoint_spline:
      return spline->eval(t);
  }
  return k;
}

struct Yaw {
  double psi = 0.0;
  double rate = 0.0;
};

Yaw eval_yaw(const TrajectoryProfile& prof, const Kinematics& k, double t) {
  Yaw y;
  switch (prof.yaw) {
    case YawProfile::fixed:
      break;
    case YawProfile::tangent: {
      const double speed2 = k.v.x() * k.v.x() + k.v.y() * k.v.y();
      if (speed2 > 1e-12) {
        y.psi = std::atan2(k.v.y(), k.v.x());
        y.rate = (k.v.x() * k.a.y() - k.v.y() * k.a.x()) / speed2;
      }
      break;
    }
    case YawProfile::sinusoid: {
      const double wy = 2.0 * M_PI / (1.37 * prof.period);
      y.psi = prof.yaw_amplitude * std::sin(wy * t);
      y.rate = prof.yaw_amplitude * wy * std::cos(wy * t);
      break;
    }
  }
  return y;
}

}  // namespace

std::vector<GroundTruthSample> generate_truth(const TrajectoryProfile& profile, double rate_hz) {
  if (profile.duration <= 0.0) throw Error("generate_truth: duration must be > 0");
  if (rate_hz <= 0.0) throw Error("generate_truth: rate must be > 0");
  const bool periodic = profile.kind == TrajectoryKind::line ||
                        profile.kind == TrajectoryKind::circle ||
                        profile.kind == TrajectoryKind::lissajous;
  if (periodic && rate_hz < 2.0 / profile.period) {
    throw Error("generate_truth: rate undersamples the profile period");
  }

  std::unique_ptr<CubicSpline> spline;
  if (profile.kind == TrajectoryKind::waypoint_spline) {
    std::mt19937_64 rng(profile.seed);
    std::uniform_real_distribution<double> u(-profile.amplitude, profile.amplitude);
    const int n_knots = 9;
    std::vector<double> knots(n_knots);
    std::vector<Eigen::Vector3d> points(n_knots);
    for (int i = 0; i < n_knots; ++i) {
      knots[i] = profile.duration * i / (n_knots - 1);
      points[i] = profile.origin + Eigen::Vector3d(u(rng), u(rng), 0.3 * u(rng));
    }
    spline = std::make_unique<CubicSpline>(std::move(knots), std::move(points));
  }

  const double dt = 1.0 / rate_hz;
  const auto n = static_cast<size_t>(std::floor(profile.duration * rate_hz)) + 1;
  std::vector<GroundTruthSample> out;
  out.reserve(n);
  for (size_t k = 0; k < n; ++k) {
    GroundTruthSample s;
    s.t = k * dt;
    Kinematics kin = eval_position(profile, spline.get(), s.t);
    Yaw yaw = eval_yaw(profile, kin, s.t);
    s.p = kin.p;
    s.v = kin.v;
    s.a = kin.a;
    s.q = so3::quat_from_angle_axis({0, 0, yaw.psi});
    s.omega = Eigen::Vector3d(0, 0, yaw.rate);  // yaw-only: body z == world z
    out.push_back(s);
  }
  return out;
}

std::vector<ImuSample> synthesize_imu(const std::vector<GroundTruthSample>& truth,
                                      const Eigen::Vector3d& accel_bias,
                                      const Eigen::Vector3d& gyro_bias, const ImuNoise& noise,
                                      const Eigen::Vector3d& gravity, std::uint64_t seed) {
  if (truth.empty()) throw Error("synthesize_imu: empty truth sequence");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto noise3 = [&](const Eigen::Vector3d& sigma) {
    return Eigen::Vector3d(sigma.x() * gauss(rng), sigma.y() * gauss(rng),
                           sigma.z() * gauss(rng));
  };

  std::vector<ImuSample> out;
  out.reserve(truth.size());
  for (const auto& s : truth) {
    ImuSample u;
    u.t = s.t;
    u.accel = so3::quat_to_rotmat(s.q).transpose() * (s.a - gravity) + accel_bias +
              noise3(noise.sigma_accel);
    u.gyro = s.omega + gyro_bias + noise3(noise.sigma_gyro);
    out.push_back(u);
  }
  return out;
}

SimulatedSensor synthesize_sensor(const std::vector<GroundTruthSample>& truth,
                                  const SensorSpec& spec, std::uint64_t seed) {
  if (truth.size() < 2) throw Error("synthesize_sensor: truth does not cover sensor rate");
  if (spec.rate_hz <= 0.0) throw Error("synthesize_sensor: rate must be > 0");
  if (spec.outlier_probability < 0.0 || spec.outlier_probability >= 1.0) {
    throw Error("synthesize_sensor: outlier probability must be in [0, 1)");
  }
  const double truth_dt = truth[1].t - truth[0].t;
  const auto step = static_cast<size_t>(std::llround(1.0 / (spec.rate_hz * truth_dt)));
  if (step < 1) throw Error("synthesize_sensor: sensor rate exceeds truth rate");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  auto noise3 = [&](const Eigen::Vector3d& sigma) {
    return Eigen::Vector3d(sigma.x() * gauss(rng), sigma.y() * gauss(rng),
                           sigma.z() * gauss(rng));
  };
  auto unit_vec = [&]() {
    Eigen::Vector3d v(gauss(rng), gauss(rng), gauss(rng));
    while (v.norm() < 1e-9) v = Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng));
    return v.normalized().eval();
  };

  DriftPose drift;
  if (spec.drift_model != DriftModel::none) drift = spec.drift_offset;
  drift.q = so3::canonical(drift.q);
  const double sample_dt = step * truth_dt;

  SimulatedSensor out;
  bool first = true;
  for (size_t k = 0; k < truth.size(); k += step) {
    const auto& s = truth[k];
    if (spec.drift_model == DriftModel::random_walk && !first) {
      drift.p += std::sqrt(sample_dt) * spec.drift_walk_pos * Eigen::Vector3d(gauss(rng),
                                                                              gauss(rng),
                                                                              gauss(rng));
      drift.q = so3::quat_multiply(
          drift.q, so3::quat_from_angle_axis(std::sqrt(sample_dt) * spec.drift_walk_att *
                                             Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng))));
    }
    first = false;
    out.drift_trace.emplace_back(s.t, drift);

    auto base = [&](MeasurementKind kind) {
      Measurement m;
      m.t = s.t;
      m.t_delivery = s.t + spec.latency;
      m.sensor_id = spec.id;
      m.kind = kind;
      return m;
    };

    // orientation first so downstream origin bootstrap sees it before the
    // position record carrying the same stamp
    if (spec.orientation) {
      Measurement m = base(MeasurementKind::orientation);
      m.quat = so3::quat_multiply(so3::quat_multiply(drift.q, s.q),
                                  so3::quat_from_angle_axis(noise3(spec.noise_att)));
      if ((spec.noise_att.array() > 0.0).all()) m.variance = spec.noise_att.cwiseAbs2();
      out.measurements.push_back(m);
    }
    if (spec.position) {
      Measurement m = base(MeasurementKind::position);
      m.vec = so3::quat_to_rotmat(drift.q) * s.p + drift.p + noise3(spec.noise_pos);
      if (spec.outlier_probability > 0.0 && uniform(rng) < spec.outlier_probability) {
        m.vec += spec.outlier_magnitude * unit_vec();
        m.outlier_label = true;
      }
      if ((spec.noise_pos.array() > 0.0).all()) m.variance = spec.noise_pos.cwiseAbs2();
      out.measurements.push_back(m);
    }
    if (spec.velocity) {
      Measurement m = base(MeasurementKind::velocity);
      m.vec = s.v + noise3(spec.noise_vel);
      if ((spec.noise_vel.array() > 0.0).all()) m.variance = spec.noise_vel.cwiseAbs2();
      out.measurements.push_back(m);
    }
  }
  return out;
}

}  // namespace msf::sim
