#pragma once

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>

#include "poseobs/observer_const.hpp"
#include "poseobs/observer_riccati.hpp"

namespace poseobs {

/// Per-sample error norms and Lyapunov values.
struct ErrorRecord {
  double t = 0.0;
  double norm_E_R = 0.0;
  double norm_e_p = 0.0;
  double norm_e_v = 0.0;
  double norm_e_omega = 0.0;
  double norm_e_accel = 0.0;
  double V1 = 0.0;
  std::optional<double> V2;

  double total_norm() const {
    return std::sqrt(norm_E_R * norm_E_R + norm_e_p * norm_e_p +
                     norm_e_v * norm_e_v + norm_e_omega * norm_e_omega +
                     norm_e_accel * norm_e_accel);
  }
};

struct ConvergenceSummary {
  double fitted_rate = 0.0;
  double fit_r2 = 0.0;
  Vec3 final_bias_gyro = Vec3::Zero();
  Vec3 final_bias_accel = Vec3::Zero();
  std::pair<double, double> window{0.0, 0.0};
};

struct BiasSummary {
  Vec3 mean = Vec3::Zero();
  double max_deviation = 0.0;
};

inline double lyapunov_v1(const Mat3& E_R, const Vec3& e_omega, double k2) {
  return 0.5 * k2 * E_R.squaredNorm() + e_omega.squaredNorm();
}

/// x^T P^{-1} x for the stacked translational error x = (e_p, e_v, e_a).
inline double lyapunov_v2(const Vec3& e_p, const Vec3& e_v, const Vec3& e_a,
                          const Mat9& P) {
  Eigen::Matrix<double, 9, 1> x;
  x << e_p, e_v, e_a;
  return x.dot(P.ldlt().solve(x));
}

/// Error norms between truth (with its true biases) and an observer state,
/// plus V1. Pass P to also record V2.
inline ErrorRecord compute_errors(double t, const TruthState& truth,
                                  const Vec3& bias_gyro, const Vec3& bias_accel,
                                  const ObserverState& obs, double k2,
                                  const Mat9* P = nullptr) {
  ErrorRecord e;
  e.t = t;
  const Mat3 E_R = truth.R - obs.R;
  const Vec3 e_p = truth.p - obs.p;
  const Vec3 e_v = truth.v - obs.v;
  const Vec3 e_w = bias_gyro - obs.bias_gyro;
  const Vec3 e_a = bias_accel - obs.bias_accel;
  e.norm_E_R = E_R.norm();
  e.norm_e_p = e_p.norm();
  e.norm_e_v = e_v.norm();
  e.norm_e_omega = e_w.norm();
  e.norm_e_accel = e_a.norm();
  e.V1 = lyapunov_v1(E_R, e_w, k2);
  if (P != nullptr) e.V2 = lyapunov_v2(e_p, e_v, e_a, *P);
  return e;
}

struct RateFit {
  double slope = 0.0;
  double r2 = 0.0;
  std::size_t samples = 0;
};

/// Least-squares line fit of log(norm) against t over [window.first,
/// window.second]. Requires at least 10 in-window samples above 1e-14.
inline RateFit fit_exponential_rate(const std::vector<std::pair<double, double>>& series,
                                    std::pair<double, double> window) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& [t, norm] : series) {
    if (t >= window.first && t <= window.second && norm > 1e-14) {
      pts.emplace_back(t, std::log(norm));
    }
  }
  if (pts.size() < 10) {
    throw InsufficientData("fit_exponential_rate: fewer than 10 usable samples");
  }
  double st = 0.0, sy = 0.0;
  for (const auto& [t, y] : pts) {
    st += t;
    sy += y;
  }
  const double mt = st / pts.size();
  const double my = sy / pts.size();
  double stt = 0.0, sty = 0.0;
  for (const auto& [t, y] : pts) {
    stt += (t - mt) * (t - mt);
    sty += (t - mt) * (y - my);
  }
  RateFit fit;
  fit.samples = pts.size();
  fit.slope = sty / stt;
  double ss_res = 0.0, ss_tot = 0.0;
  for (const auto& [t, y] : pts) {
    const double yhat = my + fit.slope * (t - mt);
    ss_res += (y - yhat) * (y - yhat);
    ss_tot += (y - my) * (y - my);
  }
  fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

/// Mean and worst per-component deviation over the trailing fraction of a
/// bias-estimate series.
inline BiasSummary summarize_bias(const std::vector<Vec3>& series,
                                  double tail_fraction) {
  if (series.empty() || !(tail_fraction > 0.0) || tail_fraction > 1.0) {
    throw InsufficientData("summarize_bias: empty series or bad tail fraction");
  }
  const auto n = series.size();
  const auto tail = static_cast<std::size_t>(std::ceil(tail_fraction * n));
  const auto start = n - tail;
  BiasSummary s;
  for (auto i = start; i < n; ++i) s.mean += series[i];
  s.mean /= static_cast<double>(tail);
  for (auto i = start; i < n; ++i) {
    s.max_deviation =
        std::max(s.max_deviation, (series[i] - s.mean).cwiseAbs().maxCoeff());
  }
  return s;
}

/// Converged when the tail wobble is under 1% of the mean magnitude, or under
/// 0.01 absolute for near-zero biases.
inline bool bias_converged(const BiasSummary& s) {
  return s.max_deviation < std::max(0.01 * s.mean.norm(), 0.01);
}

}  // namespace poseobs
