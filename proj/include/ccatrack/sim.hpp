// Scenario orchestration: the e-slot/t-slot frame protocol, GP-driven or
// genie angle tracking, the scheme zoo (CCA SPAS, TE-aware variants, UPA and
// fixed-partition baselines), per-slot metrics, the latency model, and the
// deterministic CSV outputs.
#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <thread>

#include "ccatrack/beamtrack.hpp"
#include "ccatrack/channel.hpp"
#include "ccatrack/config.hpp"

namespace ccatrack {

enum class Scheme {
  CcaPredict,
  CcaGenie,
  Upa,
  FixedPartition,
  TeAware,
  MinBeamwidth,
  Exhaustive,
};

inline Scheme parse_scheme(const std::string& s) {
  if (s == "cca-predict") return Scheme::CcaPredict;
  if (s == "cca-genie") return Scheme::CcaGenie;
  if (s == "upa") return Scheme::Upa;
  if (s == "fixed-partition") return Scheme::FixedPartition;
  if (s == "te-aware") return Scheme::TeAware;
  if (s == "min-beamwidth") return Scheme::MinBeamwidth;
  if (s == "exhaustive") return Scheme::Exhaustive;
  throw std::invalid_argument("unknown scheme: " + s);
}

inline const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::CcaPredict: return "cca-predict";
    case Scheme::CcaGenie: return "cca-genie";
    case Scheme::Upa: return "upa";
    case Scheme::FixedPartition: return "fixed-partition";
    case Scheme::TeAware: return "te-aware";
    case Scheme::MinBeamwidth: return "min-beamwidth";
    case Scheme::Exhaustive: return "exhaustive";
  }
  return "?";
}

struct MetricsRecord {
  int slot = 0;
  int e_slot = 0;  // 1 when this slot carried an MSI exchange
  std::vector<double> snr;   // per UAV, linear, interference-free
  std::vector<double> sinr;  // per UAV, linear, with inter-UAV interference
  double se_sum = 0.0;       // bits/s/Hz from the scheme's configured metric
  double min_snr = 0.0;
  std::vector<LayerId> layers;       // r-side layer per UAV
  std::vector<double> resid_az;      // true AOA minus combiner beam center
  std::vector<double> resid_el;
  double t_msi = 0.0, t_tra = 0.0, t_pro = 0.0;  // modeled latency terms [s]
};

/// Equal z-partition of a planar receive array with steering combiners at the
/// estimated AOAs (the conventional-UPA baseline).
inline PartitionPlan upa_baseline_plan(const ArrayGeometry& planar,
                                       const std::vector<AngleEstimate>& aoas) {
  const int k = static_cast<int>(aoas.size());
  const int m_each = planar.m_count / k;
  if (m_each < 1) throw std::runtime_error("upa_baseline_plan: more users than rows");
  PartitionPlan plan;
  for (int u = 0; u < k; ++u) {
    SelectionResult s;
    s.layer = {m_each, planar.n_count};
    s.estimate = aoas[u];
    int m_start = u * m_each + 1;
    int m_center = (((2 * (u + 1) - 1) * m_each + 1) + 1) / 2;
    s.codeword.layer = s.layer;
    s.codeword.alpha = wrap_two_pi(aoas[u].az_mean);
    s.codeword.beta = std::clamp(aoas[u].el_mean, 0.0, kPi);
    s.codeword.support = SubarraySpec::from_start(planar, m_start, m_each, 1, planar.n_count,
                                                  m_center, (planar.n_count + 1) / 2);
    s.codeword.awv =
        normalized_masked_steering(planar, s.codeword.alpha, s.codeword.beta, s.codeword.support);
    plan.selections.push_back(std::move(s));
  }
  return plan;
}

/// Static equal z-split of the CCA across all ring columns, combiners at the
/// max-layer quantized beam centers (the no-partition "traditional codebook"
/// baseline).
inline PartitionPlan fixed_partition_baseline(const Codebook& cb,
                                              const std::vector<AngleEstimate>& aoas) {
  const ArrayGeometry& geom = cb.geometry();
  const int k = static_cast<int>(aoas.size());
  const int m_each = geom.m_count / k;
  if (m_each < 1) throw std::runtime_error("fixed_partition_baseline: more users than rows");
  LayerId top = cb.max_layer();
  const CodebookLayer& layer = cb.layer(top.m_s, top.n_s);
  PartitionPlan plan;
  for (int u = 0; u < k; ++u) {
    SelectionResult s = select_in_layer(layer, aoas[u]);
    int m_start = u * m_each + 1;
    int m_center = (((2 * (u + 1) - 1) * m_each + 1) + 1) / 2;
    s.layer = {m_each, geom.n_count};
    s.codeword.support = SubarraySpec::from_start(geom, m_start, m_each, 1, geom.n_count,
                                                  m_center, (geom.n_count + 1) / 2);
    s.codeword.awv = normalized_masked_steering(geom, wrap_two_pi(s.codeword.alpha),
                                                std::min(s.codeword.beta, kPi),
                                                s.codeword.support);
    plan.selections.push_back(std::move(s));
  }
  return plan;
}

struct LatencyReport {
  double t_msi = 0.0, t_tra = 0.0, t_pro = 0.0;
  double t_local_e = 0.0, t_local_t = 0.0;
  double t_total_e = 0.0, t_total_t = 0.0, t_ave = 0.0;
};

/// Frame latency model: MSI exchange on the control link, payload on the
/// mmWave link, propagation, plus measured local processing.
inline LatencyReport latency_estimate(const SimConfig& cfg, double mean_rate_bps,
                                      double max_distance_m, double t_local_e = 0.0,
                                      double t_local_t = 0.0) {
  LatencyReport r;
  double b_msi = double(cfg.n_msi) * cfg.t_slots_per_exchange * cfg.msi_bits_per_value;
  r.t_msi = b_msi / cfg.c_lb_bps;
  r.t_tra = mean_rate_bps > 0.0 ? cfg.b_data_bits / mean_rate_bps : 0.0;
  r.t_pro = max_distance_m / 299792458.0;
  r.t_local_e = t_local_e;
  r.t_local_t = t_local_t;
  r.t_total_e = r.t_msi + r.t_tra + r.t_pro + r.t_local_e;
  r.t_total_t = r.t_tra + r.t_pro + r.t_local_t;
  r.t_ave = (cfg.t_slots_per_exchange * r.t_total_t + r.t_total_e) /
            (cfg.t_slots_per_exchange + 1.0);
  return r;
}

struct RunResult {
  std::vector<MetricsRecord> records;
  double mean_sum_se = 0.0;
  double mean_rate_bps = 0.0;   // mean per-UAV rate, SE * bandwidth
  double max_distance = 0.0;
  double t_local_e = 0.0;       // measured mean e-slot processing [s]
  double t_local_t = 0.0;       // measured mean t-slot processing [s]
};

/// Immutable per-configuration assets shared across Monte-Carlo runs.
struct ScenarioAssets {
  ArrayGeometry tx_geom, rx_geom;
  ElementPattern pattern;
  std::shared_ptr<const Codebook> tx_codebook;  // null for the UPA scheme
  std::shared_ptr<const Codebook> rx_codebook;
  Scheme scheme = Scheme::CcaPredict;

  static ScenarioAssets build(const SimConfig& cfg) {
    ScenarioAssets a;
    a.scheme = parse_scheme(cfg.scheme);
    a.pattern = ElementPattern(cfg.delta_alpha, cfg.delta_beta);
    if (a.scheme == Scheme::Upa) {
      a.tx_geom = ArrayGeometry::planar(cfg.m_t, cfg.n_t, cfg.lambda_c);
      a.rx_geom = ArrayGeometry::planar(cfg.m_r, cfg.n_r, cfg.lambda_c);
    } else {
      a.tx_geom = ArrayGeometry::cylindrical(cfg.m_t, cfg.n_t, cfg.r_cyl, cfg.lambda_c);
      a.rx_geom = ArrayGeometry::cylindrical(cfg.m_r, cfg.n_r, cfg.r_cyl, cfg.lambda_c);
      a.tx_codebook =
          std::make_shared<const Codebook>(Codebook::build_default(a.tx_geom, a.pattern));
      a.rx_codebook =
          std::make_shared<const Codebook>(Codebook::build_default(a.rx_geom, a.pattern));
    }
    return a;
  }
};

namespace detail {

/// GP predictor bank for one scenario: hyperparameters fitted once on the
/// r-UAV warmup history, posteriors refit per UAV at every exchange.
class MsiPredictor {
 public:
  MsiPredictor(const SimConfig& cfg, int n_uavs)
      : cfg_(cfg), horizon_(cfg.gp_horizon_or_default()), models_(size_t(n_uavs)) {}

  /// Fit hyperparameters on the reference history (call once). Variance
  /// calibration uses the time-separated tail of the same history.
  void fit(const std::vector<std::vector<UavState>>& histories, int ref_uav) {
    GpConfig gc;
    gc.max_train = cfg_.gp_max_train;
    gc.opt_iters = cfg_.gp_iters;
    gc.restarts = cfg_.gp_restarts;
    gc.seed = derive_seed(cfg_.seed, 9001);
    for (int comp = 0; comp < 6; ++comp) {
      WindowDataset d = dataset_(histories[size_t(ref_uav)], comp);
      DatasetSplit s = split_for_calibration(d, 0.6, cfg_.gp_window);
      auto model = std::make_shared<GpModel>(GpModel::fit(s.x_train, s.y_train, gc));
      if (s.has_cal) model->calibrate(s.x_cal, s.y_cal);
      base_[size_t(comp)] = model;
    }
    for (size_t u = 0; u < models_.size(); ++u)
      for (int comp = 0; comp < 6; ++comp)
        models_[u][size_t(comp)] = std::make_shared<GpModel>(*base_[size_t(comp)]);
  }

  /// Refresh the posterior data of one UAV's models from its history and
  /// forecast `horizon_` slots past the history end.
  void exchange(int uav, const std::vector<UavState>& history) {
    if (forecasts_.size() != models_.size()) forecasts_.resize(models_.size());
    Forecast& f = forecasts_[size_t(uav)];
    for (int comp = 0; comp < 6; ++comp) {
      WindowDataset d = dataset_(history, comp);
      DatasetSplit s = split_for_calibration(d, 0.6, cfg_.gp_window);
      GpModel& m = *models_[size_t(uav)][size_t(comp)];
      m.refit_data(s.x_train, s.y_train);
      if (s.has_cal) m.calibrate(s.x_cal, s.y_cal);
      // test input: the window ending at the newest history sample
      Eigen::VectorXd x = latest_window_(history, comp);
      auto [mean, var] = m.predict_calibrated(x);
      double anchor = anchor_value_(history, comp);
      f.mean[size_t(comp)].assign(mean.data(), mean.data() + mean.size());
      for (double& v : f.mean[size_t(comp)]) v += anchor;
      f.var[size_t(comp)].assign(var.data(), var.data() + var.size());
    }
  }

  /// Predicted MSI distribution of `uav` at `h` slots past its last exchange
  /// (h in [1, horizon]).
  MsiDistribution predicted(int uav, int h) const {
    const Forecast& f = forecasts_[size_t(uav)];
    int idx = std::clamp(h - 1, 0, int(f.mean[0].size()) - 1);
    MsiDistribution d;
    for (int c = 0; c < 3; ++c) {
      d.pos_mean[size_t(c)] = f.mean[size_t(c)][size_t(idx)];
      d.pos_var[size_t(c)] = f.var[size_t(c)][size_t(idx)];
    }
    for (int c = 0; c < 3; ++c) {
      d.att_mean[size_t(c)] = f.mean[size_t(3 + c)][size_t(idx)];
      d.att_var[size_t(c)] = f.var[size_t(3 + c)][size_t(idx)];
    }
    return d;
  }

 private:
  struct Forecast {
    std::array<std::vector<double>, 6> mean;
    std::array<std::vector<double>, 6> var;
  };

  static std::vector<double> component_series_(const std::vector<UavState>& h, int comp) {
    std::vector<double> s;
    s.reserve(h.size());
    for (const UavState& st : h) {
      switch (comp) {
        case 0: s.push_back(st.position.x); break;
        case 1: s.push_back(st.position.y); break;
        case 2: s.push_back(st.position.z); break;
        case 3: s.push_back(st.attitude.yaw); break;
        case 4: s.push_back(st.attitude.pitch); break;
        default: s.push_back(st.attitude.roll); break;
      }
    }
    return s;
  }

  WindowDataset dataset_(const std::vector<UavState>& h, int comp) const {
    std::vector<double> series = component_series_(h, comp);
    if (comp < 3) return make_position_dataset(series, cfg_.gp_window, horizon_);
    std::vector<Vec3> vel, acc;
    vel.reserve(h.size());
    acc.reserve(h.size());
    for (const UavState& st : h) {
      vel.push_back(st.velocity);
      acc.push_back(st.acceleration);
    }
    return make_attitude_dataset(series, vel, acc, cfg_.gp_window, horizon_);
  }

  Eigen::VectorXd latest_window_(const std::vector<UavState>& h, int comp) const {
    std::vector<double> series = component_series_(h, comp);
    if (comp >= 3) series = unwrap_angles(series);
    const int w = cfg_.gp_window;
    const int n = static_cast<int>(series.size());
    double anchor = series[size_t(n - 1)];
    Eigen::VectorXd x(comp < 3 ? w : w + 6);
    for (int c = 0; c < w; ++c) x(c) = series[size_t(n - w + c)] - anchor;
    if (comp >= 3) {
      const Vec3& v = h.back().velocity;
      const Vec3& a = h.back().acceleration;
      x(w + 0) = v.x;
      x(w + 1) = v.y;
      x(w + 2) = v.z;
      x(w + 3) = a.x;
      x(w + 4) = a.y;
      x(w + 5) = a.z;
    }
    return x;
  }

  double anchor_value_(const std::vector<UavState>& h, int comp) const {
    std::vector<double> series = component_series_(h, comp);
    if (comp >= 3) series = unwrap_angles(series);
    return series.back();
  }

  SimConfig cfg_;
  int horizon_;
  std::array<std::shared_ptr<GpModel>, 6> base_;
  std::vector<std::array<std::shared_ptr<GpModel>, 6>> models_;  // per UAV
  std::vector<Forecast> forecasts_;
};

inline AngleEstimate inject_error(const AnglePair& truth, double std_az, double std_el,
                                  double p_az, double p_el, Rng& rng) {
  AngleEstimate e;
  e.az_mean = wrap_two_pi(truth.az + rng.normal(0.0, std_az));
  e.el_mean = std::clamp(truth.el + rng.normal(0.0, std_el), 0.0, kPi);
  double ha = normal_quantile(0.5 * (1.0 + p_az)) * std_az;
  double he = normal_quantile(0.5 * (1.0 + p_el)) * std_el;
  e.az_lo = e.az_mean - ha;
  e.az_hi = e.az_mean + ha;
  e.el_lo = e.el_mean - he;
  e.el_hi = e.el_mean + he;
  e.p_az = p_az;
  e.p_el = p_el;
  return e;
}

}  // namespace detail

/// Run one seeded scenario and return the per-slot metrics series.
inline RunResult run_scenario(const SimConfig& cfg, const ScenarioAssets& assets,
                              std::uint64_t run_seed) {
  cfg.validate();
  const Scheme scheme = assets.scheme;
  const int k = cfg.k;
  const int T = cfg.t_slots_per_exchange;
  const bool injected = cfg.injected_error_std_az > 0.0 || cfg.injected_error_std_el > 0.0;
  const bool needs_gp = !injected && (scheme == Scheme::CcaPredict || scheme == Scheme::Upa ||
                                      scheme == Scheme::FixedPartition ||
                                      scheme == Scheme::TeAware ||
                                      scheme == Scheme::MinBeamwidth ||
                                      scheme == Scheme::Exhaustive);
  const bool te_scheme =
      scheme == Scheme::TeAware || scheme == Scheme::Exhaustive;

  ChannelParams params(cfg.h0_or_default(), cfg.gamma_pl, cfg.sigma_n2_or_default());
  MountingPose mount = MountingPose::identity();

  // mobility: r-UAV leads, t-UAVs follow inside the distance shell
  MobilityParams mp;
  mp.mean_turn_duration = cfg.mean_turn_duration;
  mp.sigma_r2 = cfg.sigma_r2;
  mp.v_xy = cfg.v_xy_max;
  mp.v_z_min = cfg.v_z_min;
  mp.v_z_max = cfg.v_z_max;
  mp.d_r_min = cfg.d_r_min;
  mp.d_r_max = cfg.d_r_max;
  mp.dt = cfg.slot_duration;

  Rng init_rng(derive_seed(run_seed, 1));
  SmoothTurnMobility r_gen(mp, {0.0, 0.0, 100.0}, init_rng.uniform(-kPi, kPi),
                           derive_seed(run_seed, 2));
  std::vector<SmoothTurnMobility> t_gens;
  for (int u = 0; u < k; ++u) {
    double ang = kTwoPi * u / k + init_rng.uniform(-0.3, 0.3);
    double dist = init_rng.uniform(0.3 * cfg.d_r_max, 0.6 * cfg.d_r_max);
    Vec3 start{dist * std::cos(ang), dist * std::sin(ang), 100.0 + init_rng.uniform(-10.0, 10.0)};
    t_gens.emplace_back(mp, start, init_rng.uniform(-kPi, kPi), derive_seed(run_seed, 10 + u));
  }

  std::vector<std::vector<UavState>> hist(size_t(k) + 1);  // [0] = r-UAV
  auto step_all = [&] {
    UavState rs = r_gen.step();
    hist[0].push_back(rs);
    for (int u = 0; u < k; ++u) hist[size_t(u) + 1].push_back(t_gens[size_t(u)].step_constrained(rs.position));
  };

  for (int s = 0; s < cfg.warmup_slots; ++s) step_all();

  std::optional<detail::MsiPredictor> predictor;
  if (needs_gp) {
    SimConfig seeded = cfg;
    seeded.seed = run_seed;
    predictor.emplace(seeded, k + 1);
    predictor->fit(hist, 0);
  }

  Rng te_rng(derive_seed(run_seed, 500));   // injected-error draws
  Rng mc_rng(derive_seed(run_seed, 600));   // Monte-Carlo bounding draws

  RunResult out;
  out.records.reserve(size_t(cfg.n_slots));
  double local_e_sum = 0.0, local_t_sum = 0.0;
  int e_count = 0, t_count = 0;
  double se_accum = 0.0, rate_accum = 0.0;
  long rate_count = 0;

  using clock = std::chrono::steady_clock;

  for (int s = 0; s < cfg.n_slots; ++s) {
    step_all();
    const int phase = s % T;
    const bool is_exchange = phase == 0;
    auto slot_begin = clock::now();

    if (is_exchange && needs_gp)
      for (int u = 0; u <= k; ++u) predictor->exchange(u, hist[size_t(u)]);

    const UavState& r_true = hist[0].back();

    // per-link angle estimates (and true angles for the channel)
    const size_t ku = static_cast<size_t>(k);
    std::vector<LinkAngles> truth(ku);
    std::vector<AngleEstimate> aod_est(ku), aoa_est(ku);
    std::vector<MsiDistribution> t_pred(ku);
    MsiDistribution r_pred;
    if (needs_gp && !is_exchange) {
      r_pred = predictor->predicted(0, phase);
      for (int u = 0; u < k; ++u) t_pred[size_t(u)] = predictor->predicted(u + 1, phase);
    }

    for (int u = 0; u < k; ++u) {
      const UavState& t_true = hist[size_t(u) + 1].back();
      truth[size_t(u)] = geometric_angles(t_true, r_true, mount, mount);

      if (injected) {
        // genie angles perturbed by seeded Gaussian error with matching
        // confidence intervals
        aod_est[size_t(u)] = AngleEstimate::exact(truth[size_t(u)].aod);
        aoa_est[size_t(u)] =
            detail::inject_error(truth[size_t(u)].aoa, cfg.injected_error_std_az,
                                 cfg.injected_error_std_el, cfg.p_alpha, cfg.p_beta, te_rng);
      } else if (scheme == Scheme::CcaGenie || !needs_gp || is_exchange) {
        aod_est[size_t(u)] = AngleEstimate::exact(truth[size_t(u)].aod);
        aoa_est[size_t(u)] = AngleEstimate::exact(truth[size_t(u)].aoa);
      } else {
        // t-UAV predicts the r-UAV; the r-UAV predicts each t-UAV
        MsiDistribution own_t = MsiDistribution::point(t_true);
        MsiDistribution own_r = MsiDistribution::point(r_true);
        LinkAngles predicted = geometric_angles(t_pred[size_t(u)].mean_state(),
                                                r_true, mount, mount);
        LinkAngles predicted_at_t =
            geometric_angles(t_true, r_pred.mean_state(), mount, mount);
        aod_est[size_t(u)] = AngleEstimate::exact(predicted_at_t.aod);
        if (te_scheme) {
          aoa_est[size_t(u)] =
              bound_tracking_error(t_pred[size_t(u)], own_r, mount, mount, AngleEnd::Aoa,
                                   cfg.i_max, cfg.p_alpha, cfg.p_beta, mc_rng);
        } else {
          aoa_est[size_t(u)] = AngleEstimate::exact(predicted.aoa);
        }
      }
    }

    // transmit-side selection (analog beam per t-UAV)
    std::vector<Awv> f(ku);
    std::vector<LayerId> t_layers(ku);
    if (scheme == Scheme::Upa) {
      for (int u = 0; u < k; ++u) {
        f[size_t(u)] = normalized_masked_steering(
            assets.tx_geom, wrap_two_pi(aod_est[size_t(u)].az_mean),
            std::clamp(aod_est[size_t(u)].el_mean, 0.0, kPi), SubarraySpec::full(assets.tx_geom));
        t_layers[size_t(u)] = {assets.tx_geom.m_count, assets.tx_geom.n_count};
      }
    } else {
      for (int u = 0; u < k; ++u) {
        SelectionResult sel = select_tuav_codeword(*assets.tx_codebook, aod_est[size_t(u)]);
        f[size_t(u)] = sel.codeword.awv;
        t_layers[size_t(u)] = sel.layer;
      }
    }

    // receive-side partition plan per scheme
    PartitionPlan plan;
    try {
      switch (scheme) {
        case Scheme::Upa: plan = upa_baseline_plan(assets.rx_geom, aoa_est); break;
        case Scheme::FixedPartition:
          plan = fixed_partition_baseline(*assets.rx_codebook, aoa_est);
          break;
        case Scheme::TeAware: plan = te_aware_plan(*assets.rx_codebook, aoa_est); break;
        case Scheme::Exhaustive: plan = exhaustive_plan(*assets.rx_codebook, aoa_est); break;
        case Scheme::CcaPredict:
        case Scheme::CcaGenie:
        case Scheme::MinBeamwidth:
        default: plan = spas_ruav(*assets.rx_codebook, aoa_est); break;
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("slot " + std::to_string(s) + ": " + e.what());
    }

    double slot_seconds =
        std::chrono::duration<double>(clock::now() - slot_begin).count();
    if (is_exchange) {
      local_e_sum += slot_seconds;
      ++e_count;
    } else {
      local_t_sum += slot_seconds;
      ++t_count;
    }

    // channel metrics at the true geometry
    MetricsRecord rec;
    rec.slot = s;
    rec.e_slot = is_exchange ? 1 : 0;
    std::vector<LinkState> links(ku);
    std::vector<Awv> w(ku);
    std::vector<double> powers(ku, cfg.p_tx);
    double max_d = 0.0;
    for (int u = 0; u < k; ++u) {
      const UavState& t_true = hist[size_t(u) + 1].back();
      LinkState l;
      l.distance = (r_true.position - t_true.position).norm();
      max_d = std::max(max_d, l.distance);
      l.aod_az = truth[size_t(u)].aod.az;
      l.aod_el = truth[size_t(u)].aod.el;
      l.aoa_az = truth[size_t(u)].aoa.az;
      l.aoa_el = truth[size_t(u)].aoa.el;
      l.tx_geom = &assets.tx_geom;
      l.tx_pattern = &assets.pattern;
      l.rx_geom = &assets.rx_geom;
      l.rx_pattern = &assets.pattern;
      links[size_t(u)] = l;
      w[size_t(u)] = plan.selections[size_t(u)].codeword.awv;
    }
    out.max_distance = std::max(out.max_distance, max_d);

    rec.snr.resize(size_t(k));
    rec.sinr.resize(size_t(k));
    rec.layers.resize(size_t(k));
    rec.resid_az.resize(size_t(k));
    rec.resid_el.resize(size_t(k));
    for (int u = 0; u < k; ++u) {
      rec.snr[size_t(u)] = snr(links[size_t(u)], params, f[size_t(u)], w[size_t(u)], cfg.p_tx);
      rec.sinr[size_t(u)] = sinr(u, links, f, w, powers, params);
      rec.layers[size_t(u)] = plan.selections[size_t(u)].layer;
      rec.resid_az[size_t(u)] =
          wrap_pi(truth[size_t(u)].aoa.az - plan.selections[size_t(u)].codeword.alpha);
      rec.resid_el[size_t(u)] =
          truth[size_t(u)].aoa.el - plan.selections[size_t(u)].codeword.beta;
    }
    rec.se_sum = sum_se(cfg.interference ? rec.sinr : rec.snr);
    rec.min_snr = *std::min_element(rec.snr.begin(), rec.snr.end());

    se_accum += rec.se_sum;
    for (double v : (cfg.interference ? rec.sinr : rec.snr)) {
      rate_accum += std::log2(1.0 + v) * cfg.bandwidth_hz;
      ++rate_count;
    }

    // modeled latency components (deterministic)
    double mean_rate =
        rate_count > 0 ? rate_accum / double(rate_count) : cfg.bandwidth_hz;
    LatencyReport lat = latency_estimate(cfg, mean_rate, max_d);
    rec.t_msi = is_exchange ? lat.t_msi : 0.0;
    rec.t_tra = lat.t_tra;
    rec.t_pro = lat.t_pro;

    out.records.push_back(std::move(rec));
  }

  out.mean_sum_se = cfg.n_slots > 0 ? se_accum / cfg.n_slots : 0.0;
  out.mean_rate_bps = rate_count > 0 ? rate_accum / double(rate_count) : 0.0;
  out.t_local_e = e_count > 0 ? local_e_sum / e_count : 0.0;
  out.t_local_t = t_count > 0 ? local_t_sum / t_count : 0.0;
  return out;
}

inline RunResult run_scenario(const SimConfig& cfg) {
  return run_scenario(cfg, ScenarioAssets::build(cfg), cfg.seed);
}

struct RunOutput {
  std::uint64_t seed = 0;
  RunResult result;
};

/// cfg.runs seeded runs (seed, seed+1, ...) over shared immutable assets.
/// Execution fans out over worker threads; aggregation is by seed order.
inline std::vector<RunOutput> run_many(const SimConfig& cfg) {
  cfg.validate();
  ScenarioAssets assets = ScenarioAssets::build(cfg);
  std::vector<RunOutput> out(size_t(std::max(cfg.runs, 1)));
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  unsigned workers = std::min<unsigned>(hw, out.size());
  std::atomic<size_t> next{0};
  auto work = [&] {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= out.size()) return;
      std::uint64_t seed = cfg.seed + i;
      out[i].seed = seed;
      out[i].result = run_scenario(cfg, assets, seed);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }
  return out;
}

// --- output files ------------------------------------------------------------

inline void write_run_csv(const RunResult& run, int k, std::ostream& os) {
  os << "slot,e_slot";
  for (int u = 1; u <= k; ++u)
    os << ",snr_" << u << ",sinr_" << u << ",layer_m_" << u << ",layer_n_" << u << ",resid_az_"
       << u << ",resid_el_" << u;
  os << ",sum_se,min_snr,t_msi,t_tra,t_pro\n";
  char buf[128];
  for (const MetricsRecord& r : run.records) {
    os << r.slot << "," << r.e_slot;
    for (int u = 0; u < k; ++u) {
      std::snprintf(buf, sizeof buf, ",%.12g,%.12g,%d,%d,%.12g,%.12g", r.snr[size_t(u)],
                    r.sinr[size_t(u)], r.layers[size_t(u)].m_s, r.layers[size_t(u)].n_s,
                    r.resid_az[size_t(u)], r.resid_el[size_t(u)]);
      os << buf;
    }
    std::snprintf(buf, sizeof buf, ",%.12g,%.12g,%.12g,%.12g,%.12g\n", r.se_sum, r.min_snr,
                  r.t_msi, r.t_tra, r.t_pro);
    os << buf;
  }
}

inline void write_manifest(const SimConfig& cfg, std::uint64_t seed, std::ostream& os) {
  os << "ccatrack-run-manifest v1\n";
  os << "run_seed = " << seed << "\n";
  write_config(cfg, os);
}

/// Aggregate summary: mean sum SE plus an outage table over an SNR-threshold
/// grid in dB (monotone by construction of the empirical CDF).
inline void write_summary(const std::vector<RunOutput>& runs, const SimConfig& cfg,
                          std::ostream& os) {
  double se = 0.0;
  std::vector<double> min_snrs;
  for (const RunOutput& r : runs) {
    se += r.result.mean_sum_se;
    for (const MetricsRecord& rec : r.result.records) min_snrs.push_back(rec.min_snr);
  }
  se /= std::max<size_t>(runs.size(), 1);
  char buf[128];
  os << "metric,value\n";
  std::snprintf(buf, sizeof buf, "mean_sum_se,%.12g\n", se);
  os << buf;
  std::snprintf(buf, sizeof buf, "runs,%zu\n", runs.size());
  os << buf;
  os << "\nthreshold_db,outage\n";
  for (int th_db = -20; th_db <= 80; th_db += 2) {
    double th = std::pow(10.0, th_db / 10.0);
    std::snprintf(buf, sizeof buf, "%d,%.12g\n", th_db, outage_probability(min_snrs, th));
    os << buf;
  }
}

/// Write the per-run CSVs, manifests and the aggregate summary under
/// cfg.out_dir.
inline void emit_outputs(const std::vector<RunOutput>& runs, const SimConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  for (const RunOutput& r : runs) {
    std::ofstream csv(fs::path(cfg.out_dir) / ("run_" + std::to_string(r.seed) + ".csv"));
    if (!csv) throw std::runtime_error("emit_outputs: cannot write into " + cfg.out_dir);
    write_run_csv(r.result, cfg.k, csv);
    std::ofstream man(fs::path(cfg.out_dir) / ("manifest_" + std::to_string(r.seed) + ".txt"));
    write_manifest(cfg, r.seed, man);
  }
  std::ofstream sum(fs::path(cfg.out_dir) / "summary.csv");
  write_summary(runs, cfg, sum);
}

}  // namespace ccatrack
