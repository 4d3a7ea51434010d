// Runs both observers on the bundled reference maneuver (noise-free) and
// prints the error norms at a few sample times.

#include <cstdio>

#include "poseobs/simulate.hpp"

int main() {
  using namespace poseobs;

  const SignalSpec sig = reference_signals();
  SensorSpec sensor;
  sensor.bias_gyro = Vec3(-1.0, 1.0, 5.0);
  sensor.bias_accel = Vec3(1.0, -5.0, 1.0);

  SimOptions opt;
  opt.truth0.R = exp_so3(Vec3(0.0, 0.0, -M_PI / 3.0));

  const ConstGains gains{1.0, 1.0, 3.4, 5.5, 1.3, sig.omega_bound_c};
  const SimResult constant = simulate_constant(sig, sensor, gains, opt);
  const SimResult riccati = simulate_riccati(sig, sensor, RiccatiState{}, opt);

  std::printf("%6s | %-44s | %-44s\n", "t", "constant gain", "riccati gain");
  std::printf("%6s | %8s %8s %8s %8s %8s | %8s %8s %8s %8s %8s\n", "", "|E_R|",
              "|e_p|", "|e_v|", "|e_w|", "|e_a|", "|E_R|", "|e_p|", "|e_v|",
              "|e_w|", "|e_a|");
  for (std::size_t i = 0; i < constant.rows.size(); i += 2500) {
    const auto& c = constant.rows[i].err;
    const auto& r = riccati.rows[i].err;
    std::printf(
        "%6.2f | %8.5f %8.5f %8.5f %8.5f %8.5f | %8.5f %8.5f %8.5f %8.5f "
        "%8.5f\n",
        constant.rows[i].t, c.norm_E_R, c.norm_e_p, c.norm_e_v, c.norm_e_omega,
        c.norm_e_accel, r.norm_E_R, r.norm_e_p, r.norm_e_v, r.norm_e_omega,
        r.norm_e_accel);
  }
  const auto& cf = constant.final_errors;
  const auto& rf = riccati.final_errors;
  std::printf(
      "%6.2f | %8.5f %8.5f %8.5f %8.5f %8.5f | %8.5f %8.5f %8.5f %8.5f %8.5f\n",
      cf.t, cf.norm_E_R, cf.norm_e_p, cf.norm_e_v, cf.norm_e_omega,
      cf.norm_e_accel, rf.norm_E_R, rf.norm_e_p, rf.norm_e_v, rf.norm_e_omega,
      rf.norm_e_accel);
  return 0;
}
