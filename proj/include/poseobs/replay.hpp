#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "poseobs/diagnostics.hpp"
#include "poseobs/sensor_log.hpp"

namespace poseobs {

struct ReplayOptions {
  Vec3 gravity{0.0, 0.0, -9.81};
  /// Added to both inertial channels of every row (consistency experiments).
  Vec3 add_bias = Vec3::Zero();
  /// Intervals longer than this are integrated in several ZOH sub-steps.
  double max_substep = 1e-2;
  /// Reject logs with gaps beyond this.
  double max_gap = 0.5;
  ObserverState observer0;
  double tail_fraction = 0.2;
};

struct ReplayRow {
  double t = 0.0;
  ObserverState est;
};

struct ReplayResult {
  std::vector<ReplayRow> rows;
  ConvergenceSummary summary;
  BiasSummary gyro;
  BiasSummary accel;
  bool converged_gyro = false;
  bool converged_accel = false;
};

namespace detail {

inline void validate_log(const std::vector<SensorLogRow>& log, double max_gap) {
  if (log.empty()) throw EmptyLog("replay: empty sensor log");
  for (std::size_t i = 1; i < log.size(); ++i) {
    const double gap = log[i].t - log[i - 1].t;
    if (!(gap > 0.0)) throw NonMonotoneTime("replay: non-monotone timestamps");
    if (gap > max_gap) {
      throw GapTooLarge("replay: gap of " + format_double(gap) + " s at row " +
                        std::to_string(i));
    }
  }
}

inline void fill_summary(ReplayResult& result, double tail_fraction) {
  std::vector<Vec3> gyro_series, accel_series;
  gyro_series.reserve(result.rows.size());
  accel_series.reserve(result.rows.size());
  for (const auto& r : result.rows) {
    gyro_series.push_back(r.est.bias_gyro);
    accel_series.push_back(r.est.bias_accel);
  }
  result.gyro = summarize_bias(gyro_series, tail_fraction);
  result.accel = summarize_bias(accel_series, tail_fraction);
  result.converged_gyro = bias_converged(result.gyro);
  result.converged_accel = bias_converged(result.accel);

  ConvergenceSummary& s = result.summary;
  s.final_bias_gyro = result.gyro.mean;
  s.final_bias_accel = result.accel.mean;
  const double t0 = result.rows.front().t;
  const double t1 = result.rows.back().t;
  s.window = {t0 + 0.5 * (t1 - t0), t1};
  // Distance of the bias estimates from their settled values; its decay rate
  // quantifies how fast the replay converged.
  std::vector<std::pair<double, double>> series;
  series.reserve(result.rows.size());
  for (const auto& r : result.rows) {
    const double d = std::sqrt(
        (r.est.bias_gyro - result.gyro.mean).squaredNorm() +
        (r.est.bias_accel - result.accel.mean).squaredNorm());
    series.emplace_back(r.t, d);
  }
  try {
    const RateFit fit = fit_exponential_rate(series, s.window);
    s.fitted_rate = fit.slope;
    s.fit_r2 = fit.r2;
  } catch (const InsufficientData&) {
    s.fitted_rate = 0.0;
    s.fit_r2 = 0.0;
  }
}

template <typename StepFn>
ReplayResult replay_impl(const std::vector<SensorLogRow>& log,
                         const ReplayOptions& opt, const ObserverState& start,
                         StepFn&& step) {
  validate_log(log, opt.max_gap);
  ReplayResult result;
  result.rows.reserve(log.size());
  ObserverState est = start;
  for (std::size_t i = 0; i < log.size(); ++i) {
    result.rows.push_back({log[i].t, est});
    if (i + 1 == log.size()) break;
    MeasurementFrame m = log[i].frame();
    m.omega_m += opt.add_bias;
    m.accel_m += opt.add_bias;
    const double gap = log[i + 1].t - log[i].t;
    const auto n_sub = std::max<long>(
        1, static_cast<long>(std::ceil(gap / opt.max_substep - 1e-12)));
    const double h = gap / static_cast<double>(n_sub);
    for (long k = 0; k < n_sub; ++k) est = step(est, m, h);
  }
  fill_summary(result, opt.tail_fraction);
  return result;
}

}  // namespace detail

/// Replays a sensor log through the constant-gain observer with zero-order
/// hold between samples.
inline ReplayResult replay_constant(const std::vector<SensorLogRow>& log,
                                    const ConstGains& gains,
                                    const ReplayOptions& opt = {}) {
  return detail::replay_impl(
      log, opt, opt.observer0,
      [&](const ObserverState& o, const MeasurementFrame& m, double h) {
        return step_observer_const(o, m, opt.gravity, gains, h);
      });
}

/// Replays a sensor log through the Riccati variable-gain observer.
inline ReplayResult replay_riccati(const std::vector<SensorLogRow>& log,
                                   const RiccatiState& riccati0,
                                   const ReplayOptions& opt = {}) {
  RiccatiState rs = riccati0;
  return detail::replay_impl(
      log, opt, opt.observer0,
      [&](const ObserverState& o, const MeasurementFrame& m, double h) {
        auto [next, rs_next] = step_observer_var(o, m, opt.gravity, rs, h);
        rs = rs_next;
        return next;
      });
}

}  // namespace poseobs
