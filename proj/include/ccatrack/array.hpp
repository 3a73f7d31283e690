// Steering vectors, sectored element gains and beam gains for DRE-covered
// cylindrical conformal arrays and the planar baseline.
//
// Conventions, fixed here and used everywhere else:
//   - azimuth alpha measured from +x in the array frame, wrapped to [0, 2*pi);
//   - elevation beta is the polar angle from the array +z axis, in [0, pi];
//   - element phase = (2*pi/lambda) * (u . p) with u the unit direction of
//     (alpha, beta) and p the element position, which for the cylinder equals
//     (M+1-2m)/2 * d_z * cos(beta) + r_cyl*sin(beta)*cos(alpha - phi_n);
//   - the sectored element covers phi_n +- delta_alpha/2 in azimuth and
//     pi/2 +- delta_beta/2 in elevation, closed intervals.
#pragma once

#include "ccatrack/geometry.hpp"

namespace ccatrack {

/// Phase argument of entry (m, n) of the steering vector.
inline double steering_phase(const ArrayGeometry& geom, int m, int n, double alpha,
                             double beta) {
  const double k = kTwoPi / geom.lambda_c;
  const double cb = std::cos(beta), sb = std::sin(beta);
  if (geom.kind == ArrayKind::Cylindrical) {
    const double phi_n = element_angular_position(geom, n);
    return k * (geom.z_of(m) * cb + geom.r_cyl * sb * std::cos(alpha - phi_n));
  }
  return k * (geom.z_of(m) * cb + geom.y_of(n) * sb * std::sin(alpha));
}

inline cplx steering_entry(const ArrayGeometry& geom, int m, int n, double alpha,
                           double beta) {
  return std::polar(1.0, steering_phase(geom, m, n, alpha, beta));
}

/// Full steering vector, length M*N, entry order per ArrayGeometry::index.
inline std::vector<cplx> steering_vector(const ArrayGeometry& geom, double alpha,
                                         double beta) {
  std::vector<cplx> a(geom.size());
  for (int m = 1; m <= geom.m_count; ++m)
    for (int n = 1; n <= geom.n_count; ++n)
      a[geom.index(m, n)] = steering_entry(geom, m, n, alpha, beta);
  return a;
}

/// Sectored element gain of element (m, n) at (alpha, beta): 1 or 0.
inline int element_gain(const ArrayGeometry& geom, const ElementPattern& pattern,
                        int m, int n, double alpha, double beta) {
  if (!geom.valid_index(m, n)) throw std::out_of_range("element_gain: index out of range");
  double az_center = geom.kind == ArrayKind::Cylindrical
                         ? element_angular_position(geom, n)
                         : 0.0;  // planar boresight +x
  if (!in_sector(alpha, az_center, pattern.delta_alpha / 2.0)) return 0;
  if (std::fabs(beta - kPi / 2.0) > pattern.delta_beta / 2.0) return 0;
  return 1;
}

/// Steering vector restricted to a support rectangle (support-local storage,
/// zero outside by construction). Not normalized; norm = sqrt(support size).
inline Awv masked_steering(const ArrayGeometry& geom, double alpha, double beta,
                           const SubarraySpec& support) {
  std::vector<cplx> w(support.size());
  for (int r = 0; r < support.m_act; ++r)
    for (int k = 0; k < support.n_act; ++k)
      w[r * support.n_act + k] =
          steering_entry(geom, support.row(r), support.column(k), alpha, beta);
  return Awv(support, std::move(w));
}

/// Unit-norm codeword weights: masked steering scaled by 1/sqrt(|S|).
inline Awv normalized_masked_steering(const ArrayGeometry& geom, double alpha,
                                      double beta, const SubarraySpec& support) {
  Awv v = masked_steering(geom, alpha, beta, support);
  v.normalize();
  return v;
}

/// Beam gain G = sqrt(N_act*M_act) * a(alpha, beta, S)^H v of a
/// subarray-dependent AWV along (alpha, beta). Element gains do not enter
/// here; they act in the channel.
inline cplx beam_gain(const Awv& awv, const ArrayGeometry& geom, double alpha,
                      double beta) {
  cplx acc(0.0, 0.0);
  const SubarraySpec& s = awv.support;
  for (int r = 0; r < s.m_act; ++r)
    for (int k = 0; k < s.n_act; ++k) {
      cplx a = steering_entry(geom, s.row(r), s.column(k), alpha, beta);
      acc += std::conj(a) * awv.weights[r * s.n_act + k];
    }
  return std::sqrt(static_cast<double>(s.size())) * acc;
}

inline double beam_gain_mag(const Awv& awv, const ArrayGeometry& geom, double alpha,
                            double beta) {
  return std::abs(beam_gain(awv, geom, alpha, beta));
}

/// Sum of element gains over a support at (alpha, beta); > 0 means the angle
/// lies in the support's element coverage.
inline int sum_element_gain(const ArrayGeometry& geom, const ElementPattern& pattern,
                            const SubarraySpec& support, double alpha, double beta) {
  int total = 0;
  for (int r = 0; r < support.m_act; ++r)
    for (int k = 0; k < support.n_act; ++k)
      total += element_gain(geom, pattern, support.row(r), support.column(k), alpha, beta);
  return total;
}

}  // namespace ccatrack
