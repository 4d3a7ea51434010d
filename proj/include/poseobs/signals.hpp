#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "poseobs/types.hpp"

namespace poseobs {

/// Continuous-time reference inputs for the rigid-body simulator. The angular
/// velocity must stay below omega_bound_c over the horizon of interest.
struct SignalSpec {
  std::function<Vec3(double)> angular_velocity;
  std::function<Vec3(double)> body_acceleration;
  double omega_bound_c = 0.0;
};

/// One sinusoid term amp * sin(freq * t + phase).
struct SinTerm {
  double amp = 0.0;
  double freq = 0.0;
  double phase = 0.0;

  bool operator==(const SinTerm&) const = default;
};

using AxisTerms = std::vector<SinTerm>;

inline double eval_terms(const AxisTerms& terms, double t) {
  double s = 0.0;
  for (const auto& term : terms) s += term.amp * std::sin(term.freq * t + term.phase);
  return s;
}

inline std::function<Vec3(double)> sinusoid_signal(AxisTerms x, AxisTerms y,
                                                   AxisTerms z) {
  return [x = std::move(x), y = std::move(y), z = std::move(z)](double t) {
    return Vec3(eval_terms(x, t), eval_terms(y, t), eval_terms(z, t));
  };
}

/// sup_t ||omega(t)|| estimated by dense sampling at 10x the integration rate.
inline double estimate_omega_bound(const std::function<Vec3(double)>& omega,
                                   double t_end, double dt) {
  const double h = dt / 10.0;
  const auto n = static_cast<long>(std::ceil(t_end / h));
  double sup = 0.0;
  for (long i = 0; i <= n; ++i) {
    sup = std::max(sup, omega(std::min(i * h, t_end)).norm());
  }
  return sup;
}

/// The bundled reference maneuver: fast sinusoidal tumble with a slow
/// translational acceleration profile. Exposed in configs as preset
/// "paper-sec4".
inline SignalSpec reference_signals() {
  SignalSpec sig;
  sig.angular_velocity = [](double t) {
    return Vec3(-std::sin(10.0 * t), std::cos(10.0 * t), 0.6 * std::sin(5.0 * t));
  };
  sig.body_acceleration = [](double t) {
    return Vec3(std::cos(0.5 * t), std::sin(0.5 * t), std::cos(t));
  };
  // sup ||omega||^2 = 1 + 0.36 sin^2(5t).
  sig.omega_bound_c = std::sqrt(1.36);
  return sig;
}

}  // namespace poseobs
