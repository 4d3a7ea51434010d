#pragma once

#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "poseobs/io.hpp"
#include "poseobs/signals.hpp"
#include "poseobs/types.hpp"

namespace poseobs {

/// Flat key-value run configuration with dotted section names. Defaults
/// reproduce the bundled reference scenario.
struct RunConfig {
  std::string mode = "simulate";      // simulate | replay | check-gains
  std::string observer = "both";      // constant | riccati | both
  double dt = 1e-3;
  double t_end = 15.0;
  Vec3 gravity{0.0, 0.0, -9.81};
  std::uint64_t seed = 1;
  std::string measurements = "auto";  // auto | ideal | sampled
  std::string out_dir = "out";
  bool emit_log = false;

  std::string signal_preset = "paper-sec4";  // empty to use explicit terms
  AxisTerms omega_x, omega_y, omega_z;
  AxisTerms accel_x, accel_y, accel_z;

  Vec3 truth_rotvec0{0.0, 0.0, -M_PI / 3.0};
  Vec3 truth_p0 = Vec3::Zero();
  Vec3 truth_v0 = Vec3::Zero();

  double sensor_noise = 0.01;
  Vec3 bias_gyro{-1.0, 1.0, 5.0};
  Vec3 bias_accel{1.0, -5.0, 1.0};
  std::string landmarks = "cube";  // cube | "x,y,z; x,y,z; ..."

  double k1 = 1.0;
  double k2 = 1.0;
  double k3 = 3.4;
  double k4 = 5.5;
  double k5 = 1.3;
  double omega_bound = 0.0;  // 0: estimate from the signal by dense sampling

  double riccati_k1 = 1.0;
  double riccati_k2 = 1.0;
  double q_scale = 1.0;
  double v_scale = 0.1;
  double p0_scale = 1.0;

  std::string replay_log;
  Vec3 add_bias = Vec3::Zero();
  double tail_fraction = 0.2;
  bool record_v2_const = false;

  bool operator==(const RunConfig& other) const = default;
};

namespace detail {

inline std::string vec3_to_string(const Vec3& v) {
  return format_double(v.x()) + "," + format_double(v.y()) + "," +
         format_double(v.z());
}

inline Vec3 parse_vec3(const std::string& s, const std::string& key) {
  const auto f = split_csv_line(s);
  if (f.size() != 3) throw ConfigInvalid(key + ": expected x,y,z");
  return {parse_double(f[0]), parse_double(f[1]), parse_double(f[2])};
}

/// Terms serialize as whitespace-separated amp:freq:phase triples.
inline std::string terms_to_string(const AxisTerms& terms) {
  std::string out;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i) out += ' ';
    out += format_double(terms[i].amp) + ":" + format_double(terms[i].freq) +
           ":" + format_double(terms[i].phase);
  }
  return out;
}

inline AxisTerms parse_terms(const std::string& s, const std::string& key) {
  AxisTerms terms;
  std::stringstream ss(s);
  std::string tok;
  while (ss >> tok) {
    SinTerm term;
    const auto c1 = tok.find(':');
    const auto c2 = tok.find(':', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
      throw ConfigInvalid(key + ": term must be amp:freq:phase, got '" + tok +
                          "'");
    }
    term.amp = parse_double(tok.substr(0, c1));
    term.freq = parse_double(tok.substr(c1 + 1, c2 - c1 - 1));
    term.phase = parse_double(tok.substr(c2 + 1));
    terms.push_back(term);
  }
  return terms;
}

inline bool parse_bool(const std::string& s, const std::string& key) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw ConfigInvalid(key + ": expected true or false");
}

}  // namespace detail

inline std::string serialize_config(const RunConfig& c) {
  using detail::terms_to_string;
  using detail::vec3_to_string;
  std::ostringstream out;
  out << "mode = " << c.mode << "\n";
  out << "observer = " << c.observer << "\n";
  out << "dt = " << format_double(c.dt) << "\n";
  out << "t_end = " << format_double(c.t_end) << "\n";
  out << "gravity = " << vec3_to_string(c.gravity) << "\n";
  out << "seed = " << c.seed << "\n";
  out << "measurements = " << c.measurements << "\n";
  out << "out = " << c.out_dir << "\n";
  out << "emit_log = " << (c.emit_log ? "true" : "false") << "\n";
  out << "signal.preset = " << c.signal_preset << "\n";
  out << "signal.omega_x = " << terms_to_string(c.omega_x) << "\n";
  out << "signal.omega_y = " << terms_to_string(c.omega_y) << "\n";
  out << "signal.omega_z = " << terms_to_string(c.omega_z) << "\n";
  out << "signal.accel_x = " << terms_to_string(c.accel_x) << "\n";
  out << "signal.accel_y = " << terms_to_string(c.accel_y) << "\n";
  out << "signal.accel_z = " << terms_to_string(c.accel_z) << "\n";
  out << "truth.rotvec0 = " << vec3_to_string(c.truth_rotvec0) << "\n";
  out << "truth.p0 = " << vec3_to_string(c.truth_p0) << "\n";
  out << "truth.v0 = " << vec3_to_string(c.truth_v0) << "\n";
  out << "sensor.noise = " << format_double(c.sensor_noise) << "\n";
  out << "sensor.bias_gyro = " << vec3_to_string(c.bias_gyro) << "\n";
  out << "sensor.bias_accel = " << vec3_to_string(c.bias_accel) << "\n";
  out << "sensor.landmarks = " << c.landmarks << "\n";
  out << "gains.k1 = " << format_double(c.k1) << "\n";
  out << "gains.k2 = " << format_double(c.k2) << "\n";
  out << "gains.k3 = " << format_double(c.k3) << "\n";
  out << "gains.k4 = " << format_double(c.k4) << "\n";
  out << "gains.k5 = " << format_double(c.k5) << "\n";
  out << "gains.omega_bound = " << format_double(c.omega_bound) << "\n";
  out << "riccati.k1 = " << format_double(c.riccati_k1) << "\n";
  out << "riccati.k2 = " << format_double(c.riccati_k2) << "\n";
  out << "riccati.q_scale = " << format_double(c.q_scale) << "\n";
  out << "riccati.v_scale = " << format_double(c.v_scale) << "\n";
  out << "riccati.p0_scale = " << format_double(c.p0_scale) << "\n";
  out << "replay.log = " << c.replay_log << "\n";
  out << "replay.add_bias = " << vec3_to_string(c.add_bias) << "\n";
  out << "diagnostics.tail_fraction = " << format_double(c.tail_fraction)
      << "\n";
  out << "diagnostics.v2_const = " << (c.record_v2_const ? "true" : "false")
      << "\n";
  return out.str();
}

inline RunConfig parse_config_text(const std::string& text) {
  using detail::parse_bool;
  using detail::parse_terms;
  using detail::parse_vec3;
  RunConfig c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigInvalid("config line " + std::to_string(lineno) +
                          ": expected key = value");
    }
    const auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));

    if (key == "mode") c.mode = val;
    else if (key == "observer") c.observer = val;
    else if (key == "dt") c.dt = parse_double(val);
    else if (key == "t_end") c.t_end = parse_double(val);
    else if (key == "gravity") c.gravity = parse_vec3(val, key);
    else if (key == "seed") {
      try {
        c.seed = std::stoull(val);
      } catch (const std::exception&) {
        throw ConfigInvalid("seed: expected an unsigned integer");
      }
    }
    else if (key == "measurements") c.measurements = val;
    else if (key == "out") c.out_dir = val;
    else if (key == "emit_log") c.emit_log = parse_bool(val, key);
    else if (key == "signal.preset") c.signal_preset = val;
    else if (key == "signal.omega_x") c.omega_x = parse_terms(val, key);
    else if (key == "signal.omega_y") c.omega_y = parse_terms(val, key);
    else if (key == "signal.omega_z") c.omega_z = parse_terms(val, key);
    else if (key == "signal.accel_x") c.accel_x = parse_terms(val, key);
    else if (key == "signal.accel_y") c.accel_y = parse_terms(val, key);
    else if (key == "signal.accel_z") c.accel_z = parse_terms(val, key);
    else if (key == "truth.rotvec0") c.truth_rotvec0 = parse_vec3(val, key);
    else if (key == "truth.p0") c.truth_p0 = parse_vec3(val, key);
    else if (key == "truth.v0") c.truth_v0 = parse_vec3(val, key);
    else if (key == "sensor.noise") c.sensor_noise = parse_double(val);
    else if (key == "sensor.bias_gyro") c.bias_gyro = parse_vec3(val, key);
    else if (key == "sensor.bias_accel") c.bias_accel = parse_vec3(val, key);
    else if (key == "sensor.landmarks") c.landmarks = val;
    else if (key == "gains.k1") c.k1 = parse_double(val);
    else if (key == "gains.k2") c.k2 = parse_double(val);
    else if (key == "gains.k3") c.k3 = parse_double(val);
    else if (key == "gains.k4") c.k4 = parse_double(val);
    else if (key == "gains.k5") c.k5 = parse_double(val);
    else if (key == "gains.omega_bound") c.omega_bound = parse_double(val);
    else if (key == "riccati.k1") c.riccati_k1 = parse_double(val);
    else if (key == "riccati.k2") c.riccati_k2 = parse_double(val);
    else if (key == "riccati.q_scale") c.q_scale = parse_double(val);
    else if (key == "riccati.v_scale") c.v_scale = parse_double(val);
    else if (key == "riccati.p0_scale") c.p0_scale = parse_double(val);
    else if (key == "replay.log") c.replay_log = val;
    else if (key == "replay.add_bias") c.add_bias = parse_vec3(val, key);
    else if (key == "diagnostics.tail_fraction")
      c.tail_fraction = parse_double(val);
    else if (key == "diagnostics.v2_const")
      c.record_v2_const = parse_bool(val, key);
    else
      throw ConfigInvalid("unknown config key '" + key + "'");
  }
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::string text;
  for (const auto& line : read_lines(path)) {
    text += line;
    text += '\n';
  }
  return parse_config_text(text);
}

inline void validate_config(const RunConfig& c) {
  if (!(c.dt > 0.0)) throw ConfigInvalid("dt must be positive");
  if (c.dt > 0.01) throw ConfigInvalid("dt above the 0.01 s integrator contract");
  if (!(c.t_end > 0.0)) throw ConfigInvalid("t_end must be positive");
  if (c.mode != "simulate" && c.mode != "replay" && c.mode != "check-gains") {
    throw ConfigInvalid("mode must be simulate, replay or check-gains");
  }
  if (c.observer != "constant" && c.observer != "riccati" &&
      c.observer != "both") {
    throw ConfigInvalid("observer must be constant, riccati or both");
  }
  if (c.measurements != "auto" && c.measurements != "ideal" &&
      c.measurements != "sampled") {
    throw ConfigInvalid("measurements must be auto, ideal or sampled");
  }
  if (c.measurements == "ideal" && c.sensor_noise != 0.0) {
    throw ConfigInvalid("ideal measurements require sensor.noise = 0");
  }
  if (c.sensor_noise < 0.0) throw ConfigInvalid("sensor.noise must be >= 0");
  if (!(c.k1 > 0.0) || !(c.k2 > 0.0)) {
    throw ConfigInvalid("gains.k1 and gains.k2 must be positive");
  }
  if (!(c.riccati_k1 > 0.0) || !(c.riccati_k2 > 0.0)) {
    throw ConfigInvalid("riccati.k1 and riccati.k2 must be positive");
  }
  if (!(c.q_scale > 0.0) || !(c.v_scale > 0.0) || !(c.p0_scale > 0.0)) {
    throw ConfigInvalid("riccati Q, V, P(0) scales must be positive");
  }
  if (!(c.tail_fraction > 0.0) || c.tail_fraction > 1.0) {
    throw ConfigInvalid("diagnostics.tail_fraction must be in (0, 1]");
  }
}

}  // namespace poseobs
