// Multi-resolution hierarchical codebook for DRE-covered cylindrical arrays.
//
// Each layer (m_s, n_s) quantizes the sphere into I x J beam bins of the
// layer's effective beamwidths; each codeword binds a quantized beam center
// to a located subarray rectangle and carries unit-norm masked-steering
// weights. Layer azimuth/elevation beamwidths are the min of the array
// beamwidth (2*pi / active count) and the element coverage width.
#pragma once

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "ccatrack/array.hpp"

namespace ccatrack {

struct MaxActivated {
  int n_act_max = 0;  // |n2 - n1|
  int n1 = 0;
  int n2 = 0;
};

/// Maximum number of ring elements whose sector contains azimuth alpha0,
/// with the bracketing indices n1, n2 (unreduced; the count is their gap).
/// Along z every element is activatable, so the z maximum is M.
inline MaxActivated max_activated(const ArrayGeometry& geom, const ElementPattern& pattern,
                                  double alpha0) {
  if (geom.kind != ArrayKind::Cylindrical)
    throw std::invalid_argument("max_activated: cylindrical geometry required");
  if (pattern.delta_alpha >= kTwoPi) return {geom.n_count, 0, geom.n_count};
  const double dphi = geom.delta_phi_c;
  const double x = wrap_two_pi(alpha0) / dphi + 0.5 * (geom.n_count + 1);
  MaxActivated r;
  r.n1 = static_cast<int>(std::ceil(x - pattern.delta_alpha / (2.0 * dphi)));
  r.n2 = static_cast<int>(std::ceil(x + pattern.delta_alpha / (2.0 * dphi)));
  r.n_act_max = std::abs(r.n2 - r.n1);
  return r;
}

/// Brute-force count of ring elements with nonzero element gain at alpha0.
/// Independent route used as the oracle for max_activated.
inline int count_activated_brute(const ArrayGeometry& geom, const ElementPattern& pattern,
                                 double alpha0) {
  int count = 0;
  double beta_center = kPi / 2.0;
  for (int n = 1; n <= geom.n_count; ++n)
    count += element_gain(geom, pattern, 1, n, alpha0, beta_center);
  return count;
}

/// Largest subarray ring extent realizable at every steering angle: the
/// minimum of the closed-form activation count over a fine alpha0 grid.
inline int max_activated_global(const ArrayGeometry& geom, const ElementPattern& pattern,
                                int grid = 4096) {
  int best = geom.n_count;
  for (int i = 0; i < grid; ++i) {
    double a = kTwoPi * (i + 0.5) / grid;
    best = std::min(best, max_activated(geom, pattern, a).n_act_max);
  }
  return best;
}

/// Element-coverage widths of an n_count x m_count subarray:
/// azimuth delta_alpha + (n-1)*delta_phi_c capped at 2*pi, elevation delta_beta.
inline std::pair<double, double> element_beamwidth(const ArrayGeometry& geom,
                                                   const ElementPattern& pattern,
                                                   int n_cnt, int /*m_cnt*/) {
  if (geom.kind == ArrayKind::Cylindrical && geom.delta_phi_c > pattern.delta_alpha)
    throw std::invalid_argument("element_beamwidth: full-coverage condition delta_phi_c <= delta_alpha violated");
  double bw_a = pattern.delta_alpha;
  if (geom.kind == ArrayKind::Cylindrical)
    bw_a = std::min(kTwoPi, pattern.delta_alpha + (n_cnt - 1) * geom.delta_phi_c);
  return {bw_a, pattern.delta_beta};
}

/// Effective beamwidths of layer (m_s, n_s): min of array and element widths.
inline std::pair<double, double> layer_beamwidth(int m_s, int n_s, const ArrayGeometry& geom,
                                                 const ElementPattern& pattern) {
  auto [bw_a_el, bw_e_el] = element_beamwidth(geom, pattern, n_s, m_s);
  double bw_a = std::min(kTwoPi / n_s, bw_a_el);
  double bw_e = std::min(kTwoPi / m_s, bw_e_el);
  return {bw_a, bw_e};
}

/// Center element for steering angle alpha, via the ceiling quantization:
/// n_c = ceil(alpha/delta_phi + (N+1)/2) reduced modulo N, m_c = floor(M/2).
inline std::pair<int, int> subarray_center(const ArrayGeometry& geom, double alpha, int m_total) {
  if (geom.kind != ArrayKind::Cylindrical)
    throw std::invalid_argument("subarray_center: cylindrical geometry required");
  double x = wrap_two_pi(alpha) / geom.delta_phi_c + 0.5 * (geom.n_count + 1);
  int n_c = wrap_ring_index(static_cast<int>(std::ceil(x)), geom.n_count);
  return {m_total / 2, n_c};
}

/// Ring index nearest to alpha. Codeword supports use this instead of the
/// ceiling: the rounded center keeps every support element inside its own
/// radiation sector at the beam center for all n_act <= delta_alpha/delta_phi,
/// which the ceiling does not achieve at the exact-max layer.
inline int nearest_ring_index(const ArrayGeometry& geom, double alpha) {
  double x = wrap_two_pi(alpha) / geom.delta_phi_c + 0.5 * (geom.n_count + 1);
  return wrap_ring_index(static_cast<int>(std::floor(x + 0.5)), geom.n_count);
}

struct LayerId {
  int m_s = 1;
  int n_s = 1;
  bool operator<(const LayerId& o) const {
    return m_s != o.m_s ? m_s < o.m_s : n_s < o.n_s;
  }
  bool operator==(const LayerId& o) const { return m_s == o.m_s && n_s == o.n_s; }
};

struct Codeword {
  LayerId layer;
  int i = 1, j = 1;          // azimuth / elevation bin indices, 1-based
  double alpha = 0.0;        // quantized beam center (bin midpoint)
  double beta = 0.0;
  SubarraySpec support;
  Awv awv;                   // unit norm, masked steering at the center
};

struct AngleInterval {
  double lo = 0.0, hi = 0.0;
  bool contains(double a) const { return a >= lo && a <= hi; }
};

struct CodebookLayer {
  LayerId id;
  double bw_a = 0.0, bw_e = 0.0;
  int i_count = 0, j_count = 0;
  std::vector<Codeword> codewords;  // row-major over (i, j): index (i-1)*J + (j-1)

  const Codeword& at(int i, int j) const { return codewords[(i - 1) * j_count + (j - 1)]; }
};

/// Construct a single codeword of layer (m_s, n_s) without the activation
/// realizability gate (pattern export needs layers beyond the bound).
inline Codeword make_codeword(const ArrayGeometry& geom, const ElementPattern& pattern,
                              int m_s, int n_s, int i, int j) {
  auto [bw_a, bw_e] = layer_beamwidth(m_s, n_s, geom, pattern);
  Codeword cw;
  cw.layer = {m_s, n_s};
  cw.i = i;
  cw.j = j;
  cw.alpha = (i - 0.5) * bw_a;
  cw.beta = (j - 0.5) * bw_e;
  int n_c = geom.kind == ArrayKind::Cylindrical ? nearest_ring_index(geom, cw.alpha)
                                                : (geom.n_count + 1) / 2;
  int m_c = geom.m_count / 2;
  if (m_c < 1) m_c = 1;
  cw.support = SubarraySpec::from_center(geom, m_c, n_c, m_s, n_s);
  cw.awv = normalized_masked_steering(geom, wrap_two_pi(cw.alpha),
                                      std::min(cw.beta, kPi), cw.support);
  return cw;
}

/// Beam coverage of a codeword: the exact effective-beamwidth tiles
/// [(i-1)*BW_a, i*BW_a] x [(j-1)*BW_e, j*BW_e]. Adjacent codewords share
/// exactly the boundary angle; the layer tiles the whole domain.
inline std::pair<AngleInterval, AngleInterval> codeword_coverage(const Codeword& cw,
                                                                 const ArrayGeometry& geom,
                                                                 const ElementPattern& pattern) {
  auto [bw_a, bw_e] = layer_beamwidth(cw.layer.m_s, cw.layer.n_s, geom, pattern);
  AngleInterval az{(cw.i - 1) * bw_a, cw.i * bw_a};
  AngleInterval el{(cw.j - 1) * bw_e, cw.j * bw_e};
  return {az, el};
}

/// Build the full I x J codeword grid of layer (m_s, n_s).
/// Errors when n_s exceeds the activation bound at some beam angle.
inline CodebookLayer build_layer(const ArrayGeometry& geom, const ElementPattern& pattern,
                                 int m_s, int n_s) {
  if (m_s < 1 || m_s > geom.m_count || n_s < 1 || n_s > geom.n_count)
    throw std::invalid_argument("build_layer: layer size exceeds array");
  if (geom.kind == ArrayKind::Cylindrical && n_s > max_activated_global(geom, pattern))
    throw std::invalid_argument("build_layer: n_s exceeds the maximum activatable ring extent");
  CodebookLayer layer;
  layer.id = {m_s, n_s};
  auto [bw_a, bw_e] = layer_beamwidth(m_s, n_s, geom, pattern);
  layer.bw_a = bw_a;
  layer.bw_e = bw_e;
  layer.i_count = static_cast<int>(std::ceil(kTwoPi / bw_a - 1e-12));
  layer.j_count = static_cast<int>(std::ceil(kPi / bw_e - 1e-12));
  layer.codewords.reserve(static_cast<size_t>(layer.i_count) * layer.j_count);
  for (int i = 1; i <= layer.i_count; ++i)
    for (int j = 1; j <= layer.j_count; ++j)
      layer.codewords.push_back(make_codeword(geom, pattern, m_s, n_s, i, j));
  return layer;
}

struct CoverageReport {
  bool covered = true;
  std::vector<std::pair<double, double>> uncovered;  // (alpha, beta) grid angles
};

/// Check that every grid angle in [0, 2*pi) x [0, pi] lies in at least one
/// codeword's coverage tile. Tiles are index-aligned, so only the bins
/// adjacent to the angle need inspection; absent codewords (pruned layers)
/// are detected through the presence set.
inline CoverageReport coverage_check(const CodebookLayer& layer, const ArrayGeometry& geom,
                                     const ElementPattern& pattern, double grid_step) {
  CoverageReport rep;
  std::vector<uint8_t> present;
  present.assign(size_t(layer.i_count) * size_t(layer.j_count), 0);
  std::map<std::pair<int, int>, const Codeword*> by_index;
  for (const Codeword& cw : layer.codewords) {
    if (cw.i >= 1 && cw.i <= layer.i_count && cw.j >= 1 && cw.j <= layer.j_count)
      present[size_t(cw.i - 1) * layer.j_count + size_t(cw.j - 1)] = 1;
    by_index[{cw.i, cw.j}] = &cw;
  }
  auto covered_at = [&](double alpha, double beta) {
    int i0 = static_cast<int>(std::floor(alpha / layer.bw_a)) + 1;
    int j0 = static_cast<int>(std::floor(beta / layer.bw_e)) + 1;
    for (int i = i0 - 1; i <= i0 + 1; ++i) {
      if (i < 1 || i > layer.i_count) continue;
      for (int j = j0 - 1; j <= j0 + 1; ++j) {
        if (j < 1 || j > layer.j_count) continue;
        if (!present[size_t(i - 1) * layer.j_count + size_t(j - 1)]) continue;
        auto it = by_index.find({i, j});
        auto [az, el] = codeword_coverage(*it->second, geom, pattern);
        if (az.contains(alpha) && el.contains(beta)) return true;
      }
    }
    return false;
  };
  int na = static_cast<int>(std::floor(kTwoPi / grid_step));
  int ne = static_cast<int>(std::floor(kPi / grid_step)) + 1;
  for (int ia = 0; ia < na; ++ia) {
    double alpha = ia * grid_step;
    for (int ie = 0; ie < ne; ++ie) {
      double beta = std::min(ie * grid_step, kPi);
      if (!covered_at(alpha, beta)) {
        rep.covered = false;
        rep.uncovered.emplace_back(alpha, beta);
      }
    }
  }
  return rep;
}

/// The hierarchical codebook: layers keyed by (m_s, n_s).
class Codebook {
 public:
  Codebook(const ArrayGeometry& geom, const ElementPattern& pattern)
      : geom_(geom), pattern_(pattern) {}

  /// Default layer set: powers of two in each dimension plus the exact
  /// maxima (M, N_act_max_global).
  static Codebook build_default(const ArrayGeometry& geom, const ElementPattern& pattern) {
    Codebook cb(geom, pattern);
    int n_max = geom.kind == ArrayKind::Cylindrical ? max_activated_global(geom, pattern)
                                                    : geom.n_count;
    std::vector<int> ms, ns;
    for (int v = 1; v < geom.m_count; v *= 2) ms.push_back(v);
    ms.push_back(geom.m_count);
    for (int v = 1; v < n_max; v *= 2) ns.push_back(v);
    ns.push_back(n_max);
    for (int m : ms)
      for (int n : ns) cb.add_layer(m, n);
    return cb;
  }

  void add_layer(int m_s, int n_s) {
    if (layers_.count({m_s, n_s})) return;
    layers_.emplace(LayerId{m_s, n_s}, build_layer(geom_, pattern_, m_s, n_s));
  }

  /// Insert an externally constructed layer (import path).
  void insert_layer(CodebookLayer layer) {
    LayerId id = layer.id;
    layers_.insert_or_assign(id, std::move(layer));
  }

  const CodebookLayer& layer(int m_s, int n_s) const {
    auto it = layers_.find({m_s, n_s});
    if (it == layers_.end()) throw std::out_of_range("codebook: no such layer");
    return it->second;
  }

  bool has_layer(int m_s, int n_s) const { return layers_.count({m_s, n_s}) > 0; }

  const std::map<LayerId, CodebookLayer>& layers() const { return layers_; }

  LayerId max_layer() const {
    if (layers_.empty()) throw std::runtime_error("codebook: empty");
    LayerId best = layers_.begin()->first;
    for (const auto& [id, l] : layers_)
      if (static_cast<long>(id.m_s) * id.n_s > static_cast<long>(best.m_s) * best.n_s)
        best = id;
    return best;
  }

  /// Distinct m_s values (ascending), the set M(V) of Algorithm 3.
  std::vector<int> m_layer_values() const {
    std::vector<int> v;
    for (const auto& [id, l] : layers_)
      if (v.empty() || v.back() != id.m_s) v.push_back(id.m_s);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  }

  /// Distinct n_s values (ascending), the set N(V) of Algorithm 3.
  std::vector<int> n_layer_values() const {
    std::vector<int> v;
    for (const auto& [id, l] : layers_) v.push_back(id.n_s);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  }

  const ArrayGeometry& geometry() const { return geom_; }
  const ElementPattern& pattern() const { return pattern_; }

 private:
  ArrayGeometry geom_;
  ElementPattern pattern_;
  std::map<LayerId, CodebookLayer> layers_;
};

// --- structured-text export / import (golden tests, CLI inspect) -----------

inline void export_codebook(const Codebook& cb, std::ostream& os) {
  const ArrayGeometry& g = cb.geometry();
  const ElementPattern& p = cb.pattern();
  char buf[256];
  os << "ccatrack-codebook v1\n";
  std::snprintf(buf, sizeof buf,
                "geometry kind=%s M=%d N=%d d_z=%.17g r_cyl=%.17g d_row=%.17g lambda_c=%.17g\n",
                g.kind == ArrayKind::Cylindrical ? "cylindrical" : "planar", g.m_count,
                g.n_count, g.d_z, g.r_cyl, g.d_row, g.lambda_c);
  os << buf;
  std::snprintf(buf, sizeof buf, "pattern delta_alpha=%.17g delta_beta=%.17g\n",
                p.delta_alpha, p.delta_beta);
  os << buf;
  os << "layers " << cb.layers().size() << "\n";
  for (const auto& [id, layer] : cb.layers()) {
    std::snprintf(buf, sizeof buf, "layer m_s=%d n_s=%d bw_a=%.17g bw_e=%.17g I=%d J=%d\n",
                  id.m_s, id.n_s, layer.bw_a, layer.bw_e, layer.i_count, layer.j_count);
    os << buf;
    for (const Codeword& cw : layer.codewords) {
      std::snprintf(buf, sizeof buf,
                    "codeword i=%d j=%d alpha=%.17g beta=%.17g m_start=%d m_act=%d "
                    "n_start=%d n_act=%d m_c=%d n_c=%d\n",
                    cw.i, cw.j, cw.alpha, cw.beta, cw.support.m_start, cw.support.m_act,
                    cw.support.n_start, cw.support.n_act, cw.support.m_center,
                    cw.support.n_center);
      os << buf;
      os << "w";
      for (const cplx& w : cw.awv.weights) {
        std::snprintf(buf, sizeof buf, " %.17g %.17g", w.real(), w.imag());
        os << buf;
      }
      os << "\n";
    }
  }
}

namespace detail {
inline double kv_num(const std::string& tok) {
  auto pos = tok.find('=');
  if (pos == std::string::npos) throw std::runtime_error("codebook import: expected key=value, got " + tok);
  return std::strtod(tok.c_str() + pos + 1, nullptr);
}
inline std::string kv_str(const std::string& tok) {
  auto pos = tok.find('=');
  if (pos == std::string::npos) throw std::runtime_error("codebook import: expected key=value, got " + tok);
  return tok.substr(pos + 1);
}
}  // namespace detail

inline Codebook import_codebook(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("ccatrack-codebook", 0) != 0)
    throw std::runtime_error("codebook import: bad magic");
  std::getline(is, line);
  std::istringstream gs(line);
  std::string tag, kind, t_m, t_n, t_dz, t_r, t_drow, t_lam;
  gs >> tag >> kind >> t_m >> t_n >> t_dz >> t_r >> t_drow >> t_lam;
  ArrayGeometry geom;
  if (detail::kv_str(kind) == "cylindrical")
    geom = ArrayGeometry::cylindrical(static_cast<int>(detail::kv_num(t_m)),
                                      static_cast<int>(detail::kv_num(t_n)),
                                      detail::kv_num(t_r), detail::kv_num(t_lam),
                                      detail::kv_num(t_dz));
  else
    geom = ArrayGeometry::planar(static_cast<int>(detail::kv_num(t_m)),
                                 static_cast<int>(detail::kv_num(t_n)),
                                 detail::kv_num(t_lam), detail::kv_num(t_dz),
                                 detail::kv_num(t_drow));
  std::getline(is, line);
  std::istringstream ps(line);
  std::string t_da, t_db;
  ps >> tag >> t_da >> t_db;
  ElementPattern pattern(detail::kv_num(t_da), detail::kv_num(t_db));
  Codebook cb(geom, pattern);
  std::getline(is, line);  // "layers <n>"
  CodebookLayer* cur = nullptr;
  std::map<LayerId, CodebookLayer> layers;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    ls >> tag;
    if (tag == "layer") {
      std::string t_ms, t_ns, t_ba, t_be, t_i, t_j;
      ls >> t_ms >> t_ns >> t_ba >> t_be >> t_i >> t_j;
      CodebookLayer layer;
      layer.id = {static_cast<int>(detail::kv_num(t_ms)), static_cast<int>(detail::kv_num(t_ns))};
      layer.bw_a = detail::kv_num(t_ba);
      layer.bw_e = detail::kv_num(t_be);
      layer.i_count = static_cast<int>(detail::kv_num(t_i));
      layer.j_count = static_cast<int>(detail::kv_num(t_j));
      cur = &layers.emplace(layer.id, std::move(layer)).first->second;
    } else if (tag == "codeword") {
      if (!cur) throw std::runtime_error("codebook import: codeword before layer");
      std::string t_i, t_j, t_a, t_b, t_ms, t_ma, t_ns, t_na, t_mc, t_nc;
      ls >> t_i >> t_j >> t_a >> t_b >> t_ms >> t_ma >> t_ns >> t_na >> t_mc >> t_nc;
      Codeword cw;
      cw.layer = cur->id;
      cw.i = static_cast<int>(detail::kv_num(t_i));
      cw.j = static_cast<int>(detail::kv_num(t_j));
      cw.alpha = detail::kv_num(t_a);
      cw.beta = detail::kv_num(t_b);
      cw.support = SubarraySpec::from_start(
          geom, static_cast<int>(detail::kv_num(t_ms)), static_cast<int>(detail::kv_num(t_ma)),
          static_cast<int>(detail::kv_num(t_ns)), static_cast<int>(detail::kv_num(t_na)),
          static_cast<int>(detail::kv_num(t_mc)), static_cast<int>(detail::kv_num(t_nc)));
      if (!std::getline(is, line)) throw std::runtime_error("codebook import: missing weights");
      std::istringstream ws(line);
      std::string wt;
      ws >> wt;
      std::vector<cplx> weights;
      double re, im;
      while (ws >> re >> im) weights.emplace_back(re, im);
      cw.awv = Awv(cw.support, std::move(weights));
      cur->codewords.push_back(std::move(cw));
    }
  }
  for (auto& [id, layer] : layers) cb.insert_layer(std::move(layer));
  return cb;
}

// Pattern export: tabular |G| samples for one layer on the azimuth plane at
// the elevation bin nearest pi/2 (polar-plot data).
inline void export_layer_pattern(const ArrayGeometry& geom, const ElementPattern& pattern,
                                 int m_s, int n_s, int samples, std::ostream& os) {
  auto [bw_a, bw_e] = layer_beamwidth(m_s, n_s, geom, pattern);
  int i_count = static_cast<int>(std::ceil(kTwoPi / bw_a - 1e-12));
  int j_count = static_cast<int>(std::ceil(kPi / bw_e - 1e-12));
  int j_mid = std::clamp(static_cast<int>(std::ceil((kPi / 2.0) / bw_e)), 1, j_count);
  os << "codeword_i,alpha_deg,gain_abs,element_cover\n";
  char buf[128];
  for (int i = 1; i <= i_count; ++i) {
    Codeword cw = make_codeword(geom, pattern, m_s, n_s, i, j_mid);
    for (int s = 0; s < samples; ++s) {
      double alpha = kTwoPi * s / samples;
      double g = beam_gain_mag(cw.awv, geom, alpha, cw.beta);
      int cover = sum_element_gain(geom, pattern, cw.support, alpha, cw.beta);
      std::snprintf(buf, sizeof buf, "%d,%.6f,%.9g,%d\n", i, rad2deg(alpha), g, cover);
      os << buf;
    }
  }
}

}  // namespace ccatrack
