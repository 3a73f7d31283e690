// Scenario configuration: one flat key=value text file, keys matching the
// SimConfig field names exactly.
#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "ccatrack/angles.hpp"

namespace ccatrack {

struct SimConfig {
  // arrays (counts are z-rows x ring columns)
  int m_t = 16, n_t = 64;
  int m_r = 112, n_r = 64;
  double r_cyl = 0.0509;       // cylinder radius [m]
  double lambda_c = 0.005;     // carrier wavelength [m]
  double delta_alpha = 2.0 * kPi / 3.0;  // DRE azimuth width [rad]
  double delta_beta = kPi;               // DRE elevation width [rad]

  // network
  int k = 2;                   // number of t-UAVs
  int n_rf = 5;                // r-UAV RF chains; requires k < n_rf
  double p_tx = 0.06;          // transmit power per t-UAV [W]
  double h0 = 0.0;             // reference amplitude gain; 0 = auto lambda/(4*pi)
  double gamma_pl = 2.0;       // path-loss exponent
  double sigma_n2 = 0.0;       // noise power [W]; 0 = auto kT*B*NF
  double noise_figure_db = 10.0;
  double bandwidth_hz = 1e9;
  int interference = 0;        // 1: SINR with cross terms, 0: SNR path

  // mobility
  double mean_turn_duration = 1.0;
  double sigma_r2 = 0.05;
  double v_xy_max = 20.0;
  double v_z_min = 2.0, v_z_max = 3.0;
  double d_r_min = 10.0, d_r_max = 300.0;
  double slot_duration = 0.01;  // [s]

  // frame protocol
  int t_slots_per_exchange = 50;  // T
  int n_slots = 300;              // tracked slots after warmup
  int warmup_slots = 150;         // history accumulated before tracking starts

  // GP settings
  int gp_window = 8;
  int gp_horizon = 0;          // 0 = t_slots_per_exchange
  int gp_max_train = 96;
  int gp_iters = 60;
  int gp_restarts = 1;

  // tracking-error bounding
  int i_max = 1000;
  double p_alpha = 0.9, p_beta = 0.9;
  double injected_error_std_az = 0.0;  // > 0 replaces GP angle estimates with
  double injected_error_std_el = 0.0;  // true angles + seeded Gaussian error

  // execution
  std::string scheme = "cca-predict";  // cca-predict | cca-genie | upa |
                                       // fixed-partition | te-aware |
                                       // min-beamwidth | exhaustive
  std::uint64_t seed = 1;
  int runs = 1;
  std::string out_dir = "out";

  // latency model constants
  double c_lb_bps = 5e5;       // control-link rate
  int n_msi = 6;               // MSI dimensions per slot
  int msi_bits_per_value = 4;
  double b_data_bits = 1e6;    // payload block per slot

  int gp_horizon_or_default() const {
    return gp_horizon > 0 ? gp_horizon : t_slots_per_exchange;
  }
  double h0_or_default() const { return h0 > 0.0 ? h0 : lambda_c / (4.0 * kPi); }
  double sigma_n2_or_default() const {
    if (sigma_n2 > 0.0) return sigma_n2;
    return 4.0e-21 * bandwidth_hz * std::pow(10.0, noise_figure_db / 10.0);  // kT0 = 4e-21 W/Hz
  }

  void validate() const {
    if (m_t < 1 || n_t < 1 || m_r < 1 || n_r < 1)
      throw std::invalid_argument("config: array sizes must be >= 1");
    if (r_cyl <= 0 || lambda_c <= 0) throw std::invalid_argument("config: r_cyl/lambda_c must be > 0");
    if (k < 1) throw std::invalid_argument("config: k must be >= 1");
    if (k >= n_rf) throw std::invalid_argument("config: requires k < n_rf");
    if (p_tx <= 0) throw std::invalid_argument("config: p_tx must be > 0");
    if (d_r_min >= d_r_max) throw std::invalid_argument("config: d_r_min must be < d_r_max");
    if (slot_duration <= 0) throw std::invalid_argument("config: slot_duration must be > 0");
    if (t_slots_per_exchange < 1) throw std::invalid_argument("config: t_slots_per_exchange >= 1");
    if (i_max < 100) throw std::invalid_argument("config: i_max must be >= 100");
    if (p_alpha <= 0 || p_alpha > 1 || p_beta <= 0 || p_beta > 1)
      throw std::invalid_argument("config: p_alpha/p_beta in (0, 1]");
  }
};

namespace detail {
template <typename T>
void put_kv(std::ostream& os, const char* key, T v) {
  os << key << " = " << v << "\n";
}
inline void put_kvd(std::ostream& os, const char* key, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  os << key << " = " << buf << "\n";
}
}  // namespace detail

inline void write_config(const SimConfig& c, std::ostream& os) {
  using detail::put_kv;
  using detail::put_kvd;
  put_kv(os, "m_t", c.m_t);
  put_kv(os, "n_t", c.n_t);
  put_kv(os, "m_r", c.m_r);
  put_kv(os, "n_r", c.n_r);
  put_kvd(os, "r_cyl", c.r_cyl);
  put_kvd(os, "lambda_c", c.lambda_c);
  put_kvd(os, "delta_alpha", c.delta_alpha);
  put_kvd(os, "delta_beta", c.delta_beta);
  put_kv(os, "k", c.k);
  put_kv(os, "n_rf", c.n_rf);
  put_kvd(os, "p_tx", c.p_tx);
  put_kvd(os, "h0", c.h0);
  put_kvd(os, "gamma_pl", c.gamma_pl);
  put_kvd(os, "sigma_n2", c.sigma_n2);
  put_kvd(os, "noise_figure_db", c.noise_figure_db);
  put_kvd(os, "bandwidth_hz", c.bandwidth_hz);
  put_kv(os, "interference", c.interference);
  put_kvd(os, "mean_turn_duration", c.mean_turn_duration);
  put_kvd(os, "sigma_r2", c.sigma_r2);
  put_kvd(os, "v_xy_max", c.v_xy_max);
  put_kvd(os, "v_z_min", c.v_z_min);
  put_kvd(os, "v_z_max", c.v_z_max);
  put_kvd(os, "d_r_min", c.d_r_min);
  put_kvd(os, "d_r_max", c.d_r_max);
  put_kvd(os, "slot_duration", c.slot_duration);
  put_kv(os, "t_slots_per_exchange", c.t_slots_per_exchange);
  put_kv(os, "n_slots", c.n_slots);
  put_kv(os, "warmup_slots", c.warmup_slots);
  put_kv(os, "gp_window", c.gp_window);
  put_kv(os, "gp_horizon", c.gp_horizon);
  put_kv(os, "gp_max_train", c.gp_max_train);
  put_kv(os, "gp_iters", c.gp_iters);
  put_kv(os, "gp_restarts", c.gp_restarts);
  put_kv(os, "i_max", c.i_max);
  put_kvd(os, "p_alpha", c.p_alpha);
  put_kvd(os, "p_beta", c.p_beta);
  put_kvd(os, "injected_error_std_az", c.injected_error_std_az);
  put_kvd(os, "injected_error_std_el", c.injected_error_std_el);
  put_kv(os, "scheme", c.scheme);
  put_kv(os, "seed", c.seed);
  put_kv(os, "runs", c.runs);
  put_kv(os, "out_dir", c.out_dir);
  put_kvd(os, "c_lb_bps", c.c_lb_bps);
  put_kv(os, "n_msi", c.n_msi);
  put_kv(os, "msi_bits_per_value", c.msi_bits_per_value);
  put_kvd(os, "b_data_bits", c.b_data_bits);
}

/// Parse `key = value` lines; '#' starts a comment; unknown keys are errors.
inline SimConfig parse_config(std::istream& is) {
  SimConfig c;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      bool blank = line.find_first_not_of(" \t\r") == std::string::npos;
      if (blank) continue;
      throw std::runtime_error("config line " + std::to_string(line_no) + ": expected key = value");
    }
    auto trim = [](std::string s) {
      size_t b = s.find_first_not_of(" \t\r");
      size_t e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    auto as_i = [&] { return std::stoi(val); };
    auto as_d = [&] { return std::strtod(val.c_str(), nullptr); };
    if (key == "m_t") c.m_t = as_i();
    else if (key == "n_t") c.n_t = as_i();
    else if (key == "m_r") c.m_r = as_i();
    else if (key == "n_r") c.n_r = as_i();
    else if (key == "r_cyl") c.r_cyl = as_d();
    else if (key == "lambda_c") c.lambda_c = as_d();
    else if (key == "delta_alpha") c.delta_alpha = as_d();
    else if (key == "delta_beta") c.delta_beta = as_d();
    else if (key == "k") c.k = as_i();
    else if (key == "n_rf") c.n_rf = as_i();
    else if (key == "p_tx") c.p_tx = as_d();
    else if (key == "h0") c.h0 = as_d();
    else if (key == "gamma_pl") c.gamma_pl = as_d();
    else if (key == "sigma_n2") c.sigma_n2 = as_d();
    else if (key == "noise_figure_db") c.noise_figure_db = as_d();
    else if (key == "bandwidth_hz") c.bandwidth_hz = as_d();
    else if (key == "interference") c.interference = as_i();
    else if (key == "mean_turn_duration") c.mean_turn_duration = as_d();
    else if (key == "sigma_r2") c.sigma_r2 = as_d();
    else if (key == "v_xy_max") c.v_xy_max = as_d();
    else if (key == "v_z_min") c.v_z_min = as_d();
    else if (key == "v_z_max") c.v_z_max = as_d();
    else if (key == "d_r_min") c.d_r_min = as_d();
    else if (key == "d_r_max") c.d_r_max = as_d();
    else if (key == "slot_duration") c.slot_duration = as_d();
    else if (key == "t_slots_per_exchange") c.t_slots_per_exchange = as_i();
    else if (key == "n_slots") c.n_slots = as_i();
    else if (key == "warmup_slots") c.warmup_slots = as_i();
    else if (key == "gp_window") c.gp_window = as_i();
    else if (key == "gp_horizon") c.gp_horizon = as_i();
    else if (key == "gp_max_train") c.gp_max_train = as_i();
    else if (key == "gp_iters") c.gp_iters = as_i();
    else if (key == "gp_restarts") c.gp_restarts = as_i();
    else if (key == "i_max") c.i_max = as_i();
    else if (key == "p_alpha") c.p_alpha = as_d();
    else if (key == "p_beta") c.p_beta = as_d();
    else if (key == "injected_error_std_az") c.injected_error_std_az = as_d();
    else if (key == "injected_error_std_el") c.injected_error_std_el = as_d();
    else if (key == "scheme") c.scheme = val;
    else if (key == "seed") c.seed = std::stoull(val);
    else if (key == "runs") c.runs = as_i();
    else if (key == "out_dir") c.out_dir = val;
    else if (key == "c_lb_bps") c.c_lb_bps = as_d();
    else if (key == "n_msi") c.n_msi = as_i();
    else if (key == "msi_bits_per_value") c.msi_bits_per_value = as_i();
    else if (key == "b_data_bits") c.b_data_bits = as_d();
    else throw std::runtime_error("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
  return c;
}

inline SimConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("config: cannot open " + path);
  return parse_config(f);
}

}  // namespace ccatrack
