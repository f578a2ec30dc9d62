// Copyright 2026 The mefse3 Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "mefse3/errors.hpp"

namespace mefse3::app {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

double to_double(const std::string& v) {
  double x = 0.0;
  const auto* end = v.data() + v.size();
  const auto r = std::from_chars(v.data(), end, x);
  if (r.ec != std::errc() || r.ptr != end) throw ConfigError("not a number: '" + v + "'");
  return x;
}

long long to_integer(const std::string& v) {
  long long x = 0;
  const auto* end = v.data() + v.size();
  const auto r = std::from_chars(v.data(), end, x);
  if (r.ec != std::errc() || r.ptr != end) throw ConfigError("not an integer: '" + v + "'");
  return x;
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("not a boolean: '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string fmt_double(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, r.ptr);
}

template <class T, class F>
std::string join(const std::vector<T>& v, F f) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + f(v[i]);
  return out;
}

template <class M>
ConfigKey double_key(M member) {
  return {[member](ExperimentConfig& c, const std::string& v) { c.*member = to_double(v); },
          [member](const ExperimentConfig& c) { return fmt_double(c.*member); }};
}

template <class M>
ConfigKey int_key(M member) {
  return {[member](ExperimentConfig& c, const std::string& v) { c.*member = static_cast<int>(to_integer(v)); },
          [member](const ExperimentConfig& c) { return std::to_string(c.*member); }};
}

template <class M>
ConfigKey string_key(M member) {
  return {[member](ExperimentConfig& c, const std::string& v) { c.*member = v; },
          [member](const ExperimentConfig& c) { return c.*member; }};
}

}  // namespace

const std::map<std::string, ConfigKey>& config_keys() {
  using C = ExperimentConfig;
  static const std::map<std::string, ConfigKey> keys = {
      {"order", int_key(&C::order)},
      {"alpha", double_key(&C::alpha)},
      {"delta", double_key(&C::delta)},
      {"s1", double_key(&C::s1)},
      {"s2", double_key(&C::s2)},
      {"s_velocity_scale", double_key(&C::s_velocity_scale)},
      {"steps_per_frame", int_key(&C::steps_per_frame)},
      {"psd_hessian",
       {[](C& c, const std::string& v) { c.psd_hessian = to_bool(v); },
        [](const C& c) { return std::string(c.psd_hessian ? "true" : "false"); }}},
      {"q_scale", double_key(&C::q_scale)},
      {"n_obs", int_key(&C::n_obs)},
      {"track_file", string_key(&C::track_file)},
      {"track_order", int_key(&C::track_order)},
      {"frames", int_key(&C::frames)},
      {"frame_interval", double_key(&C::frame_interval)},
      {"amplitude", double_key(&C::amplitude)},
      {"v0_scale", double_key(&C::v0_scale)},
      {"observations", string_key(&C::observations)},
      {"noise", string_key(&C::noise)},
      {"noise_var", double_key(&C::noise_var)},
      {"seed",
       {[](C& c, const std::string& v) {
          const long long s = to_integer(v);
          if (s < 0) throw ConfigError("must be non-negative");
          c.seed = static_cast<std::uint64_t>(s);
        },
        [](const C& c) { return std::to_string(c.seed); }}},
      {"output", string_key(&C::output)},
      {"track_out", string_key(&C::track_out)},
      {"obs_out", string_key(&C::obs_out)},
      {"sweep_orders",
       {[](C& c, const std::string& v) {
          c.sweep_orders.clear();
          for (const auto& s : split_list(v)) c.sweep_orders.push_back(static_cast<int>(to_integer(s)));
        },
        [](const C& c) { return join(c.sweep_orders, [](int x) { return std::to_string(x); }); }}},
      {"sweep_noise",
       {[](C& c, const std::string& v) { c.sweep_noise = split_list(v); },
        [](const C& c) { return join(c.sweep_noise, [](const std::string& x) { return x; }); }}},
      {"sweep_variances",
       {[](C& c, const std::string& v) {
          c.sweep_variances.clear();
          for (const auto& s : split_list(v)) c.sweep_variances.push_back(to_double(s));
        },
        [](const C& c) { return join(c.sweep_variances, fmt_double); }}},
      {"sweep_n",
       {[](C& c, const std::string& v) {
          c.sweep_n.clear();
          for (const auto& s : split_list(v)) c.sweep_n.push_back(static_cast<int>(to_integer(s)));
        },
        [](const C& c) { return join(c.sweep_n, [](int x) { return std::to_string(x); }); }}},
      {"sweep_alpha",
       {[](C& c, const std::string& v) {
          c.sweep_alpha.clear();
          for (const auto& s : split_list(v)) c.sweep_alpha.push_back(to_double(s));
        },
        [](const C& c) { return join(c.sweep_alpha, fmt_double); }}},
      {"repeats", int_key(&C::repeats)},
      {"threads", int_key(&C::threads)},
      {"compare_observations", string_key(&C::compare_observations)},
      {"compare_frames", int_key(&C::compare_frames)},
      {"compare_interval", double_key(&C::compare_interval)},
      {"compare_substeps", int_key(&C::compare_substeps)},
      {"gt_noise", double_key(&C::gt_noise)},
      {"mef_obs_weight", double_key(&C::mef_obs_weight)},
      {"mef_s", double_key(&C::mef_s)},
      {"ekf_s", double_key(&C::ekf_s)},
      {"ekf_obs_var", double_key(&C::ekf_obs_var)},
      {"mef_init", string_key(&C::mef_init)},
      {"ekf_init", string_key(&C::ekf_init)},
      {"compare_psd_hessian",
       {[](C& c, const std::string& v) { c.compare_psd_hessian = to_bool(v); },
        [](const C& c) { return std::string(c.compare_psd_hessian ? "true" : "false"); }}},
  };
  return keys;
}

void set_key(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  const auto& keys = config_keys();
  const auto it = keys.find(key);
  if (it == keys.end()) throw ConfigError("unknown configuration key '" + key + "'");
  try {
    it->second.set(cfg, trim(value));
  } catch (const ConfigError& e) {
    throw ConfigError("key '" + key + "': " + e.what());
  }
}

void read_config(std::istream& in, ExperimentConfig& cfg) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    try {
      set_key(cfg, trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void load_config_file(const std::string& path, ExperimentConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  read_config(in, cfg);
}

std::string dump_config(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& [key, entry] : config_keys()) out += key + " = " + entry.get(cfg) + "\n";
  return out;
}

FilterConfig ExperimentConfig::filter_config(int order_override) const {
  const int m = order_override > 0 ? order_override : order;
  FilterConfig c = FilterConfig::uniform(m, alpha, s1, s2, delta);
  for (int b = 1; b < m; ++b) c.s_blocks[b] *= s_velocity_scale;
  c.steps_per_frame = steps_per_frame;
  c.psd_hessian = psd_hessian;
  return c;
}

Mat2 ExperimentConfig::point_weight() const { return (q_scale / n_obs) * Mat2::Identity(); }

NoiseModel ExperimentConfig::noise_model() const { return NoiseModel::parse(noise, noise_var); }

void ExperimentConfig::validate() const {
  filter_config().validate();
  if (!(s_velocity_scale > 0.0)) throw ConfigError("s_velocity_scale must be positive");
  if (!(q_scale > 0.0)) throw ConfigError("q_scale must be positive");
  // Fewer than two flow vectors cannot pin down the motion.
  if (n_obs < 2) throw ConfigError("n_obs must be at least 2");
  for (int n : sweep_n) {
    if (n < 2) throw ConfigError("sweep_n entries must be at least 2");
  }
  if (track_order < 0 || track_order > kMaxOrder - 1) throw ConfigError("track_order out of range");
  if (frames < 1) throw ConfigError("frames must be positive");
  if (!(frame_interval > 0.0)) throw ConfigError("frame_interval must be positive");
  noise_model();
  for (const auto& n : sweep_noise) NoiseModel::parse(n, 0.0);
  for (double v : sweep_variances) {
    if (!(v >= 0.0)) throw ConfigError("sweep variances must be non-negative");
  }
  for (int m : sweep_orders) {
    if (m < 1 || m > kMaxOrder) throw ConfigError("sweep order out of range");
  }
  if (sweep_orders.empty() || sweep_noise.empty() || sweep_variances.empty()) throw ConfigError("sweep grid is empty");
  if (repeats < 1) throw ConfigError("repeats must be positive");
  if (threads < 0) throw ConfigError("threads must be non-negative");
  if (compare_observations != "linear" && compare_observations != "projective") {
    throw ConfigError("compare_observations must be 'linear' or 'projective'");
  }
  if (compare_frames < 1 || compare_substeps < 1 || !(compare_interval > 0.0)) {
    throw ConfigError("comparison frames, interval and substeps must be positive");
  }
  if (!(gt_noise >= 0.0) || !(mef_obs_weight > 0.0) || !(mef_s > 0.0) || !(ekf_s > 0.0) || !(ekf_obs_var > 0.0)) {
    throw ConfigError("comparison noise levels and weights must be positive");
  }
  for (const auto* init : {&mef_init, &ekf_init}) {
    if (*init != "identity" && *init != "truth") throw ConfigError("initialization must be 'identity' or 'truth'");
  }
  if (!track_file.empty()) {
    std::ifstream in(track_file);
    if (!in) throw ConfigError("track file '" + track_file + "' does not exist");
  }
  if (!observations.empty()) {
    std::ifstream in(observations);
    if (!in) throw ConfigError("observation file '" + observations + "' does not exist");
  }
}

}  // namespace mefse3::app
