// LoS mmWave MIMO channel between DRE-covered arrays plus the link metrics
// (SNR / SINR / sum SE / outage).
//
// The channel is rank one: H = g * (L_r o A_r)(L_t o A_t)^H with amplitude
// g = h0 * D^(-gamma/2), so received power falls as D^(-gamma). w^H H f is
// evaluated from the two factor inner products; H is never materialized.
#pragma once

#include <vector>

#include "ccatrack/array.hpp"

namespace ccatrack {

struct ChannelParams {
  double h0 = 1.0;        // complex reference gain magnitude (dimensionless)
  double gamma_pl = 2.0;  // path-loss exponent
  double sigma_n2 = 1e-9; // noise power, linear [W]

  ChannelParams() = default;
  ChannelParams(double h0_, double gamma_, double sigma_) : h0(h0_), gamma_pl(gamma_), sigma_n2(sigma_) {
    if (gamma_pl < 0.0) throw std::invalid_argument("channel: gamma must be >= 0");
    if (sigma_n2 <= 0.0) throw std::invalid_argument("channel: sigma_n2 must be > 0");
  }
};

/// One LoS link at one slot: distance plus both array-frame angle pairs.
struct LinkState {
  double distance = 1.0;              // [m]
  double aod_az = 0.0, aod_el = kPi / 2.0;  // at the transmit array
  double aoa_az = 0.0, aoa_el = kPi / 2.0;  // at the receive array
  const ArrayGeometry* tx_geom = nullptr;
  const ElementPattern* tx_pattern = nullptr;
  const ArrayGeometry* rx_geom = nullptr;
  const ElementPattern* rx_pattern = nullptr;
};

/// Inner product v^H (Lambda o A) over the support of v: the element-gain
/// weighted steering response seen by a masked AWV.
inline cplx awv_response(const Awv& v, const ArrayGeometry& geom, const ElementPattern& pattern,
                         double alpha, double beta) {
  cplx acc(0.0, 0.0);
  const SubarraySpec& s = v.support;
  for (int r = 0; r < s.m_act; ++r)
    for (int k = 0; k < s.n_act; ++k) {
      int m = s.row(r), n = s.column(k);
      if (!element_gain(geom, pattern, m, n, alpha, beta)) continue;
      acc += std::conj(v.weights[r * s.n_act + k]) * steering_entry(geom, m, n, alpha, beta);
    }
  return acc;
}

/// w^H H f for one link via the rank-1 factorization.
inline cplx effective_gain(const LinkState& link, const ChannelParams& params, const Awv& f,
                           const Awv& w) {
  if (link.distance <= 0.0) throw std::invalid_argument("effective_gain: distance must be > 0");
  double g = params.h0 * std::pow(link.distance, -params.gamma_pl / 2.0);
  cplx rx = awv_response(w, *link.rx_geom, *link.rx_pattern, link.aoa_az, link.aoa_el);
  cplx tx = awv_response(f, *link.tx_geom, *link.tx_pattern, link.aod_az, link.aod_el);
  return g * rx * std::conj(tx);
}

/// Linear SNR of link k: p |w^H H f|^2 / sigma^2 (unit-norm w).
inline double snr(const LinkState& link, const ChannelParams& params, const Awv& f, const Awv& w,
                  double power) {
  cplx e = effective_gain(link, params, f, w);
  return power * std::norm(e) / params.sigma_n2;
}

/// Linear SINR of link k with interference from the other transmitters.
/// links[i] describes the path from transmitter i to the receiver; the k-th
/// receive AWV combines them all.
inline double sinr(int k, const std::vector<LinkState>& links, const std::vector<Awv>& f,
                   const std::vector<Awv>& w, const std::vector<double>& powers,
                   const ChannelParams& params) {
  cplx sig = effective_gain(links[k], params, f[k], w[k]);
  double num = powers[k] * std::norm(sig);
  double interf = 0.0;
  for (size_t i = 0; i < links.size(); ++i) {
    if (static_cast<int>(i) == k) continue;
    // interference path: transmitter i's beam into receiver combiner k
    LinkState cross = links[i];
    cplx e = effective_gain(cross, params, f[i], w[k]);
    interf += powers[i] * std::norm(e);
  }
  return num / (interf + params.sigma_n2);
}

/// Sum spectral efficiency, log2.
inline double sum_se(const std::vector<double>& sinr_values) {
  double r = 0.0;
  for (double v : sinr_values) r += std::log2(1.0 + v);
  return r;
}

/// Fraction of slots whose minimum per-user SNR falls below the threshold.
inline double outage_probability(const std::vector<double>& min_snr_samples, double threshold) {
  if (min_snr_samples.empty()) return 0.0;
  size_t out = 0;
  for (double v : min_snr_samples)
    if (v < threshold) ++out;
  return static_cast<double>(out) / static_cast<double>(min_snr_samples.size());
}

/// Explicit H-matrix route: the independent oracle for effective_gain. Only
/// sensible on small arrays.
inline cplx effective_gain_explicit(const LinkState& link, const ChannelParams& params,
                                    const Awv& f, const Awv& w) {
  const ArrayGeometry& gt = *link.tx_geom;
  const ArrayGeometry& gr = *link.rx_geom;
  double g = params.h0 * std::pow(link.distance, -params.gamma_pl / 2.0);
  std::vector<cplx> ur(gr.size()), ut(gt.size());
  for (int m = 1; m <= gr.m_count; ++m)
    for (int n = 1; n <= gr.n_count; ++n)
      ur[gr.index(m, n)] = double(element_gain(gr, *link.rx_pattern, m, n, link.aoa_az, link.aoa_el)) *
                           steering_entry(gr, m, n, link.aoa_az, link.aoa_el);
  for (int m = 1; m <= gt.m_count; ++m)
    for (int n = 1; n <= gt.n_count; ++n)
      ut[gt.index(m, n)] = double(element_gain(gt, *link.tx_pattern, m, n, link.aod_az, link.aod_el)) *
                           steering_entry(gt, m, n, link.aod_az, link.aod_el);
  std::vector<cplx> fd = f.to_dense(gt), wd = w.to_dense(gr);
  // H[a][b] = g * ur[a] * conj(ut[b]); accumulate w^H H f entry by entry
  cplx acc(0.0, 0.0);
  for (int a = 0; a < gr.size(); ++a) {
    if (wd[a] == cplx(0.0, 0.0)) continue;
    cplx row(0.0, 0.0);
    for (int b = 0; b < gt.size(); ++b) row += std::conj(ut[b]) * fd[b];
    acc += std::conj(wd[a]) * g * ur[a] * row;
  }
  return acc;
}

}  // namespace ccatrack
