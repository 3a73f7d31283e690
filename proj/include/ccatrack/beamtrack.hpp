// Codeword selection and joint subarray partition: per-t-UAV selection, the
// r-UAV multi-user conflict detection / resolution loop, tracking-error-aware
// two-step beamwidth control, and the exhaustive layer-search oracle.
#pragma once

#include <numeric>

#include "ccatrack/codebook.hpp"
#include "ccatrack/tracking.hpp"

namespace ccatrack {

struct SelectionResult {
  LayerId layer;
  int i = 1, j = 1;
  double residual_az = 0.0;  // estimate - beam center, wrapped
  double residual_el = 0.0;
  Codeword codeword;
  AngleEstimate estimate;  // the driving estimate (kept for re-ranking)
};

/// Bin index i = ceil(angle / width), clamped into [1, count]; exact bin
/// edges resolve to the smaller index, matching the index formulas.
inline int quantize_index(double angle, double width, int count) {
  int i = static_cast<int>(std::ceil(angle / width - 1e-12));
  return std::clamp(i, 1, count);
}

/// Codeword of `layer` nearest to the estimate's mean angles.
inline SelectionResult select_in_layer(const CodebookLayer& layer, const AngleEstimate& est) {
  SelectionResult r;
  r.layer = layer.id;
  r.i = quantize_index(wrap_two_pi(est.az_mean), layer.bw_a, layer.i_count);
  r.j = quantize_index(std::clamp(est.el_mean, 0.0, kPi), layer.bw_e, layer.j_count);
  r.codeword = layer.at(r.i, r.j);
  r.residual_az = wrap_pi(est.az_mean - r.codeword.alpha);
  r.residual_el = est.el_mean - r.codeword.beta;
  r.estimate = est;
  return r;
}

/// t-UAV selection: the maximum-resolution layer, indices from the quantized
/// AOD estimate.
inline SelectionResult select_tuav_codeword(const Codebook& cb, const AngleEstimate& aod) {
  LayerId top = cb.max_layer();
  return select_in_layer(cb.layer(top.m_s, top.n_s), aod);
}

/// r-UAV per-user selection without the conflict constraint (same form as the
/// t-UAV rule, driven by AOAs on the receive codebook).
inline std::vector<SelectionResult> select_ruav_unconstrained(const Codebook& cb,
                                                              const std::vector<AngleEstimate>& aoas) {
  std::vector<SelectionResult> out;
  out.reserve(aoas.size());
  for (const AngleEstimate& est : aoas) out.push_back(select_tuav_codeword(cb, est));
  return out;
}

/// K x K symmetric conflict matrix with zero diagonal and transitive closure.
struct ConflictMatrix {
  int k = 0;
  std::vector<uint8_t> bits;  // row-major

  explicit ConflictMatrix(int users = 0) : k(users), bits(size_t(users) * users, 0) {}
  bool at(int a, int b) const { return bits[size_t(a) * k + b] != 0; }
  void set(int a, int b) {
    if (a == b) return;
    bits[size_t(a) * k + b] = 1;
    bits[size_t(b) * k + a] = 1;
  }
  bool any() const {
    for (uint8_t b : bits)
      if (b) return true;
    return false;
  }
};

/// Conflict iff both the wrap-aware ring distance of the centers and the z
/// distance fall below the half-sum of the extents; closed under
/// transitivity.
inline ConflictMatrix detect_conflicts(const std::vector<SubarraySpec>& supports, int n_total,
                                       int /*m_total*/) {
  const int k = static_cast<int>(supports.size());
  ConflictMatrix c(k);
  for (int a = 0; a < k; ++a)
    for (int b = a + 1; b < k; ++b) {
      const SubarraySpec& sa = supports[a];
      const SubarraySpec& sb = supports[b];
      double ring = ring_distance(sa.n_center, sb.n_center, n_total);
      double zd = std::abs(sa.m_center - sb.m_center);
      if (ring < 0.5 * (sa.n_act + sb.n_act) && zd < 0.5 * (sa.m_act + sb.m_act)) c.set(a, b);
    }
  // transitive closure (Floyd-Warshall on the boolean matrix)
  for (int m = 0; m < k; ++m)
    for (int a = 0; a < k; ++a)
      if (c.at(a, m))
        for (int b = 0; b < k; ++b)
          if (c.at(m, b) && a != b) c.set(a, b);
  return c;
}

struct PartitionPlan {
  std::vector<SelectionResult> selections;  // per UAV, with updated supports/AWVs
  int iterations = 0;                       // resolution loop count
};

/// Resolve conflicts: each conflict set of size c splits the z axis into
/// floor(M/c) rows per member (rank by AOA azimuth ascending), keeping each
/// member's ring extent; AWVs are rebuilt over the updated supports at the
/// original beam centers. Repeats until the conflict matrix clears.
inline PartitionPlan resolve_conflicts(std::vector<SelectionResult> selections,
                                       ConflictMatrix conflicts, const ArrayGeometry& geom) {
  const int k = static_cast<int>(selections.size());
  PartitionPlan plan;
  int guard = 0;
  while (conflicts.any()) {
    if (++guard > k + 1) throw std::runtime_error("resolve_conflicts: loop bound exceeded");
    std::vector<int> done(k, 0);
    for (int a = 0; a < k; ++a) {
      if (done[a]) continue;
      std::vector<int> set;
      set.push_back(a);
      for (int b = 0; b < k; ++b)
        if (b != a && conflicts.at(a, b)) set.push_back(b);
      for (int m : set) done[m] = 1;
      if (set.size() < 2) continue;

      // rank members by AOA azimuth ascending (stable, geometry-driven)
      std::sort(set.begin(), set.end(), [&](int x, int y) {
        double ax = wrap_two_pi(selections[x].estimate.az_mean);
        double ay = wrap_two_pi(selections[y].estimate.az_mean);
        if (ax != ay) return ax < ay;
        return x < y;
      });

      const int c = static_cast<int>(set.size());
      const int m_act = geom.m_count / c;
      if (m_act == 0)
        throw std::runtime_error("resolve_conflicts: more conflicting users than z rows");
      for (int r = 1; r <= c; ++r) {
        SelectionResult& sel = selections[set[size_t(r - 1)]];
        int m_start = (r - 1) * m_act + 1;
        int m_center = (((2 * r - 1) * m_act + 1) + 1) / 2;  // ceil(((2r-1)Ma+1)/2)
        SubarraySpec updated = SubarraySpec::from_start(
            geom, m_start, m_act, sel.codeword.support.n_start, sel.codeword.support.n_act,
            m_center, sel.codeword.support.n_center);
        sel.codeword.support = updated;
        sel.codeword.awv = normalized_masked_steering(geom, wrap_two_pi(sel.codeword.alpha),
                                                      std::min(sel.codeword.beta, kPi), updated);
      }
    }
    std::vector<SubarraySpec> supports;
    supports.reserve(k);
    for (const SelectionResult& s : selections) supports.push_back(s.codeword.support);
    conflicts = detect_conflicts(supports, geom.n_count, geom.m_count);
    plan.iterations = guard;
  }
  plan.selections = std::move(selections);
  return plan;
}

/// Full r-UAV SPAS: unconstrained selection, conflict detection, resolution.
inline PartitionPlan spas_ruav(const Codebook& cb, const std::vector<AngleEstimate>& aoas) {
  std::vector<SelectionResult> sel = select_ruav_unconstrained(cb, aoas);
  std::vector<SubarraySpec> supports;
  supports.reserve(sel.size());
  for (const SelectionResult& s : sel) supports.push_back(s.codeword.support);
  ConflictMatrix c = detect_conflicts(supports, cb.geometry().n_count, cb.geometry().m_count);
  return resolve_conflicts(std::move(sel), std::move(c), cb.geometry());
}

enum class GainPlane { Azimuth, Elevation };

/// Minimum |G| over the two endpoints of the estimate's error range in one
/// plane, the other angle held at its mean.
inline double min_edge_gain(const Codeword& cw, const ArrayGeometry& geom,
                            const AngleEstimate& est, GainPlane plane) {
  if (plane == GainPlane::Azimuth) {
    double lo = beam_gain_mag(cw.awv, geom, wrap_two_pi(est.az_lo), std::clamp(est.el_mean, 0.0, kPi));
    double hi = beam_gain_mag(cw.awv, geom, wrap_two_pi(est.az_hi), std::clamp(est.el_mean, 0.0, kPi));
    return std::min(lo, hi);
  }
  double lo = beam_gain_mag(cw.awv, geom, wrap_two_pi(est.az_mean), std::clamp(est.el_lo, 0.0, kPi));
  double hi = beam_gain_mag(cw.awv, geom, wrap_two_pi(est.az_mean), std::clamp(est.el_hi, 0.0, kPi));
  return std::min(lo, hi);
}

/// Two-step tracking-error-aware selection: scan n_s at m_s = M_max for the
/// best worst-case azimuth edge gain, then scan m_s at the chosen n_s for the
/// best worst-case elevation edge gain. Ties break toward the smaller layer
/// index. Conflict handling happens afterwards at the multi-user level.
inline SelectionResult te_aware_select(const Codebook& cb, const AngleEstimate& est) {
  std::vector<int> n_values = cb.n_layer_values();
  std::vector<int> m_values = cb.m_layer_values();
  int m_max = m_values.back();

  int best_n = n_values.front();
  double best_gain = -1.0;
  for (int n_s : n_values) {
    if (!cb.has_layer(m_max, n_s)) continue;
    SelectionResult cand = select_in_layer(cb.layer(m_max, n_s), est);
    double g = min_edge_gain(cand.codeword, cb.geometry(), est, GainPlane::Azimuth);
    if (g > best_gain + 1e-12) {
      best_gain = g;
      best_n = n_s;
    }
  }

  int best_m = m_values.front();
  best_gain = -1.0;
  for (int m_s : m_values) {
    if (!cb.has_layer(m_s, best_n)) continue;
    SelectionResult cand = select_in_layer(cb.layer(m_s, best_n), est);
    double g = min_edge_gain(cand.codeword, cb.geometry(), est, GainPlane::Elevation);
    if (g > best_gain + 1e-12) {
      best_gain = g;
      best_m = m_s;
    }
  }
  return select_in_layer(cb.layer(best_m, best_n), est);
}

/// Worst-case objective used by the layer searches: min of the two planes'
/// edge gains.
inline double worst_edge_gain(const Codeword& cw, const ArrayGeometry& geom,
                              const AngleEstimate& est) {
  return std::min(min_edge_gain(cw, geom, est, GainPlane::Azimuth),
                  min_edge_gain(cw, geom, est, GainPlane::Elevation));
}

/// Brute force over every layer: the optimality oracle for the two-step
/// scheme.
inline SelectionResult exhaustive_layer_search(const Codebook& cb, const AngleEstimate& est) {
  bool have = false;
  SelectionResult best;
  double best_gain = -1.0;
  for (const auto& [id, layer] : cb.layers()) {
    SelectionResult cand = select_in_layer(layer, est);
    double g = worst_edge_gain(cand.codeword, cb.geometry(), est);
    if (!have || g > best_gain + 1e-12) {
      have = true;
      best_gain = g;
      best = cand;
    }
  }
  if (!have) throw std::runtime_error("exhaustive_layer_search: empty codebook");
  return best;
}

/// TE-aware multi-user plan: per-user two-step selection, then the
/// Algorithm-1 conflict loop.
inline PartitionPlan te_aware_plan(const Codebook& cb, const std::vector<AngleEstimate>& ests) {
  std::vector<SelectionResult> sel;
  sel.reserve(ests.size());
  for (const AngleEstimate& e : ests) sel.push_back(te_aware_select(cb, e));
  std::vector<SubarraySpec> supports;
  for (const SelectionResult& s : sel) supports.push_back(s.codeword.support);
  ConflictMatrix c = detect_conflicts(supports, cb.geometry().n_count, cb.geometry().m_count);
  return resolve_conflicts(std::move(sel), std::move(c), cb.geometry());
}

/// Exhaustive multi-user plan (oracle counterpart of te_aware_plan).
inline PartitionPlan exhaustive_plan(const Codebook& cb, const std::vector<AngleEstimate>& ests) {
  std::vector<SelectionResult> sel;
  sel.reserve(ests.size());
  for (const AngleEstimate& e : ests) sel.push_back(exhaustive_layer_search(cb, e));
  std::vector<SubarraySpec> supports;
  for (const SelectionResult& s : sel) supports.push_back(s.codeword.support);
  ConflictMatrix c = detect_conflicts(supports, cb.geometry().n_count, cb.geometry().m_count);
  return resolve_conflicts(std::move(sel), std::move(c), cb.geometry());
}

/// Pairwise-disjointness of the plan's supports (the hard partition
/// invariant; checked by tests and the simulator's debug paths).
inline bool plan_disjoint(const PartitionPlan& plan) {
  for (size_t a = 0; a < plan.selections.size(); ++a)
    for (size_t b = a + 1; b < plan.selections.size(); ++b)
      if (plan.selections[a].codeword.support.overlaps(plan.selections[b].codeword.support))
        return false;
  return true;
}

/// Structured-text dump of a plan (regression fixtures).
inline void export_plan(const PartitionPlan& plan, std::ostream& os) {
  os << "ccatrack-plan v1\n";
  char buf[256];
  for (size_t u = 0; u < plan.selections.size(); ++u) {
    const SelectionResult& s = plan.selections[u];
    std::snprintf(buf, sizeof buf,
                  "uav=%zu layer=%d,%d i=%d j=%d alpha=%.17g beta=%.17g m_start=%d m_act=%d "
                  "n_start=%d n_act=%d m_c=%d n_c=%d\n",
                  u + 1, s.layer.m_s, s.layer.n_s, s.i, s.j, s.codeword.alpha, s.codeword.beta,
                  s.codeword.support.m_start, s.codeword.support.m_act,
                  s.codeword.support.n_start, s.codeword.support.n_act,
                  s.codeword.support.m_center, s.codeword.support.n_center);
    os << buf;
  }
}

}  // namespace ccatrack
