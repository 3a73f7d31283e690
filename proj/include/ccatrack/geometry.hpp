// Array geometry: cylindrical / planar element lattices, element patterns,
// subarray rectangles with ring wrap-around, and antenna weight vectors.
#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ccatrack/angles.hpp"

namespace ccatrack {

using cplx = std::complex<double>;

enum class ArrayKind { Cylindrical, Planar };

/// Element lattice of an M x N array.
///
/// Cylindrical: N elements form a ring in the xy-plane at angular pitch
/// delta_phi_c = 2*pi/N on a cylinder of radius r_cyl; M elements stack along
/// the z axis at spacing d_z. Element (m, n), 1-based, sits at height
/// z_m = (M + 1 - 2m)/2 * d_z and ring angle phi_n = (2n - 1 - N)/2 * delta_phi_c.
///
/// Planar: N columns along the y axis at spacing d_row, M rows along z,
/// boresight +x. Same 1-based (m, n) indexing.
struct ArrayGeometry {
  ArrayKind kind = ArrayKind::Cylindrical;
  int m_count = 1;        // M, along z
  int n_count = 1;        // N, around the ring (or planar row)
  double d_z = 0.0;       // z spacing [m]
  double delta_phi_c = 0.0;  // ring angular pitch [rad], 2*pi/N
  double r_cyl = 0.0;     // cylinder radius [m]
  double d_row = 0.0;     // planar in-row spacing [m]
  double lambda_c = 0.0;  // carrier wavelength [m]

  static ArrayGeometry cylindrical(int m, int n, double radius, double lambda,
                                   double dz = 0.0) {
    if (m < 1 || n < 1) throw std::invalid_argument("array: M, N must be >= 1");
    if (radius <= 0.0) throw std::invalid_argument("array: r_cyl must be > 0");
    if (lambda <= 0.0) throw std::invalid_argument("array: lambda_c must be > 0");
    ArrayGeometry g;
    g.kind = ArrayKind::Cylindrical;
    g.m_count = m;
    g.n_count = n;
    g.d_z = dz > 0.0 ? dz : lambda / 2.0;
    g.delta_phi_c = kTwoPi / n;
    g.r_cyl = radius;
    g.lambda_c = lambda;
    return g;
  }

  static ArrayGeometry planar(int m, int n, double lambda, double dz = 0.0,
                              double drow = 0.0) {
    if (m < 1 || n < 1) throw std::invalid_argument("array: M, N must be >= 1");
    if (lambda <= 0.0) throw std::invalid_argument("array: lambda_c must be > 0");
    ArrayGeometry g;
    g.kind = ArrayKind::Planar;
    g.m_count = m;
    g.n_count = n;
    g.d_z = dz > 0.0 ? dz : lambda / 2.0;
    g.d_row = drow > 0.0 ? drow : lambda / 2.0;
    g.lambda_c = lambda;
    return g;
  }

  int size() const { return m_count * n_count; }

  /// Linear index of element (m, n), both 1-based.
  int index(int m, int n) const { return (m - 1) * n_count + (n - 1); }

  bool valid_index(int m, int n) const {
    return m >= 1 && m <= m_count && n >= 1 && n <= n_count;
  }

  /// z coordinate of row m (height above the array center).
  double z_of(int m) const { return 0.5 * (m_count + 1 - 2 * m) * d_z; }

  /// y coordinate of planar column n.
  double y_of(int n) const { return 0.5 * (2 * n - 1 - n_count) * d_row; }
};

/// Ideal sectored directional radiating element: unit gain inside the sector,
/// zero outside. Azimuth sector is centered on the element's ring position
/// (cylindrical) or on boresight (planar); elevation sector is centered on
/// the ring plane (beta = pi/2 in the polar convention used throughout).
struct ElementPattern {
  double delta_alpha = kTwoPi;  // azimuth radiation width [rad]
  double delta_beta = kPi;      // elevation radiation width [rad]

  ElementPattern() = default;
  ElementPattern(double da, double db) : delta_alpha(da), delta_beta(db) {
    if (da <= 0.0 || da > kTwoPi) throw std::invalid_argument("pattern: delta_alpha out of (0, 2*pi]");
    if (db <= 0.0 || db > kPi) throw std::invalid_argument("pattern: delta_beta out of (0, pi]");
  }
};

/// Angular position of ring element n (cylindrical arrays only).
inline double element_angular_position(const ArrayGeometry& geom, int n) {
  if (geom.kind != ArrayKind::Cylindrical)
    throw std::invalid_argument("element_angular_position: planar geometry");
  if (n < 1 || n > geom.n_count)
    throw std::out_of_range("element_angular_position: ring index out of range");
  return 0.5 * (2 * n - 1 - geom.n_count) * geom.delta_phi_c;
}

/// Reduce a ring index to [1, N].
inline int wrap_ring_index(int n, int n_count) {
  int r = (n - 1) % n_count;
  if (r < 0) r += n_count;
  return r + 1;
}

/// Wrap-aware ring distance between two ring indices (at most N/2).
inline int ring_distance(int n_a, int n_b, int n_count) {
  int d = n_a - n_b;
  if (d < 0) d = -d;
  d %= n_count;
  if (d > n_count / 2) d = n_count - d;
  return d;
}

/// A rectangle of m_act x n_act activated elements. Rows never wrap (the z
/// axis is a line); ring columns wrap modulo N. The stored center element is
/// what the conflict criterion operates on; the start indices define actual
/// membership, so post-resolution rectangles need not be centered.
struct SubarraySpec {
  int m_start = 1, m_act = 1;  // z rows [m_start, m_start + m_act - 1]
  int n_start = 1, n_act = 1;  // ring columns, wrapping modulo N
  int m_center = 1, n_center = 1;
  int m_total = 1, n_total = 1;  // parent array dimensions

  SubarraySpec() = default;

  /// Expand a rectangle about a center element. Even extents place the extra
  /// element on the high-index side; the z window is clamped into [1, M].
  static SubarraySpec from_center(const ArrayGeometry& geom, int m_c, int n_c,
                                  int m_act, int n_act) {
    if (m_act < 1 || m_act > geom.m_count || n_act < 1 || n_act > geom.n_count)
      throw std::invalid_argument("subarray: size exceeds array");
    SubarraySpec s;
    s.m_total = geom.m_count;
    s.n_total = geom.n_count;
    s.m_act = m_act;
    s.n_act = n_act;
    s.m_center = m_c;
    s.n_center = wrap_ring_index(n_c, geom.n_count);
    int start = m_c - (m_act + 1) / 2 + 1;
    if (start < 1) start = 1;
    if (start + m_act - 1 > geom.m_count) start = geom.m_count - m_act + 1;
    s.m_start = start;
    s.n_start = wrap_ring_index(s.n_center - (n_act + 1) / 2 + 1, geom.n_count);
    return s;
  }

  /// Explicit rectangle (conflict resolution assigns row windows directly).
  static SubarraySpec from_start(const ArrayGeometry& geom, int m_start, int m_act,
                                 int n_start, int n_act, int m_center, int n_center) {
    if (m_start < 1 || m_start + m_act - 1 > geom.m_count)
      throw std::invalid_argument("subarray: z window out of range");
    if (n_act < 1 || n_act > geom.n_count)
      throw std::invalid_argument("subarray: ring extent exceeds array");
    SubarraySpec s;
    s.m_total = geom.m_count;
    s.n_total = geom.n_count;
    s.m_start = m_start;
    s.m_act = m_act;
    s.n_start = wrap_ring_index(n_start, geom.n_count);
    s.n_act = n_act;
    s.m_center = m_center;
    s.n_center = wrap_ring_index(n_center, geom.n_count);
    return s;
  }

  static SubarraySpec full(const ArrayGeometry& geom) {
    return from_start(geom, 1, geom.m_count, 1, geom.n_count, (geom.m_count + 1) / 2,
                      (geom.n_count + 1) / 2);
  }

  int size() const { return m_act * n_act; }

  bool contains(int m, int n) const {
    if (m < m_start || m > m_start + m_act - 1) return false;
    int off = (n - n_start) % n_total;
    if (off < 0) off += n_total;
    return off < n_act;
  }

  /// n index of the k-th column of the rectangle, k in [0, n_act).
  int column(int k) const { return wrap_ring_index(n_start + k, n_total); }

  /// m index of the r-th row of the rectangle, r in [0, m_act).
  int row(int r) const { return m_start + r; }

  /// Support-local index of (m, n); -1 if outside.
  int local_index(int m, int n) const {
    if (m < m_start || m > m_start + m_act - 1) return -1;
    int off = (n - n_start) % n_total;
    if (off < 0) off += n_total;
    if (off >= n_act) return -1;
    return (m - m_start) * n_act + off;
  }

  bool overlaps(const SubarraySpec& other) const {
    if (m_start + m_act - 1 < other.m_start || other.m_start + other.m_act - 1 < m_start)
      return false;
    for (int k = 0; k < n_act; ++k) {
      int n = column(k);
      int off = (n - other.n_start) % n_total;
      if (off < 0) off += n_total;
      if (off < other.n_act) return true;
    }
    return false;
  }

  bool operator==(const SubarraySpec& o) const {
    return m_start == o.m_start && m_act == o.m_act && n_start == o.n_start &&
           n_act == o.n_act && m_total == o.m_total && n_total == o.n_total;
  }
};

/// Antenna weight vector: unit-norm complex weights over a support rectangle,
/// exactly zero elsewhere. Weights are stored support-local (row-major over
/// the rectangle) to keep large-array codewords cheap.
struct Awv {
  SubarraySpec support;
  std::vector<cplx> weights;  // size support.size()

  Awv() = default;
  Awv(SubarraySpec s, std::vector<cplx> w) : support(s), weights(std::move(w)) {
    if (static_cast<int>(weights.size()) != support.size())
      throw std::invalid_argument("awv: weight count does not match support");
  }

  cplx entry(int m, int n) const {
    int li = support.local_index(m, n);
    return li < 0 ? cplx(0.0, 0.0) : weights[li];
  }

  double norm() const {
    double s = 0.0;
    for (const cplx& w : weights) s += std::norm(w);
    return std::sqrt(s);
  }

  void normalize() {
    double nrm = norm();
    if (nrm <= 0.0) throw std::runtime_error("awv: cannot normalize zero vector");
    for (cplx& w : weights) w /= nrm;
  }

  /// Dense length-M*N entry vector (oracle tests; avoid on large arrays).
  std::vector<cplx> to_dense(const ArrayGeometry& geom) const {
    std::vector<cplx> d(geom.size(), cplx(0.0, 0.0));
    for (int r = 0; r < support.m_act; ++r)
      for (int k = 0; k < support.n_act; ++k) {
        int m = support.row(r), n = support.column(k);
        d[geom.index(m, n)] = weights[r * support.n_act + k];
      }
    return d;
  }
};

}  // namespace ccatrack
