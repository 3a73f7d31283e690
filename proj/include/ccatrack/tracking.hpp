// MSI prediction plumbing and tracking-error bounding: lagged-window GP
// datasets for position/attitude channels, per-slot Gaussian MSI
// distributions, and the Monte-Carlo beam-angle error intervals.
#pragma once

#include <algorithm>
#include <array>

#include "ccatrack/frames.hpp"
#include "ccatrack/gp.hpp"

namespace ccatrack {

/// Remove 2*pi jumps from an angle series (cumulative unwrap).
inline std::vector<double> unwrap_angles(const std::vector<double>& a) {
  std::vector<double> out(a.size());
  if (a.empty()) return out;
  out[0] = a[0];
  for (size_t i = 1; i < a.size(); ++i) out[i] = out[i - 1] + wrap_pi(a[i] - a[i - 1]);
  return out;
}

/// Lagged-window dataset for one position channel. Row s corresponds to a
/// window ending at series index s-1; inputs and outputs are centered on the
/// window's last value so the GP sees increments, not absolute drift.
/// X: (window values - anchor), Y: (future values - anchor), anchors: the
/// window-end values.
struct WindowDataset {
  Eigen::MatrixXd X, Y;
  std::vector<double> anchors;
  std::vector<int> anchor_slots;  // series index of each anchor (window end)
};

inline WindowDataset make_position_dataset(const std::vector<double>& series, int window,
                                           int horizon) {
  const int len = static_cast<int>(series.size());
  const int rows = len - window - horizon + 1;
  if (rows < 2) throw std::invalid_argument("dataset: series too short for window/horizon");
  WindowDataset d;
  d.X.resize(rows, window);
  d.Y.resize(rows, horizon);
  d.anchors.resize(rows);
  d.anchor_slots.resize(rows);
  for (int r = 0; r < rows; ++r) {
    int end = r + window;  // first predicted index
    double anchor = series[end - 1];
    for (int c = 0; c < window; ++c) d.X(r, c) = series[r + c] - anchor;
    for (int h = 0; h < horizon; ++h) d.Y(r, h) = series[end + h] - anchor;
    d.anchors[r] = anchor;
    d.anchor_slots[r] = end - 1;
  }
  return d;
}

/// Attitude channels additionally carry the velocity and acceleration at the
/// window end, per the tracking-input definition. The angle series is
/// unwrapped before windowing.
inline WindowDataset make_attitude_dataset(const std::vector<double>& angle_series,
                                           const std::vector<Vec3>& vel,
                                           const std::vector<Vec3>& acc, int window,
                                           int horizon) {
  std::vector<double> u = unwrap_angles(angle_series);
  const int len = static_cast<int>(u.size());
  const int rows = len - window - horizon + 1;
  if (rows < 2) throw std::invalid_argument("dataset: series too short for window/horizon");
  WindowDataset d;
  d.X.resize(rows, window + 6);
  d.Y.resize(rows, horizon);
  d.anchors.resize(rows);
  d.anchor_slots.resize(rows);
  for (int r = 0; r < rows; ++r) {
    int end = r + window;
    double anchor = u[end - 1];
    for (int c = 0; c < window; ++c) d.X(r, c) = u[r + c] - anchor;
    const Vec3& v = vel[end - 1];
    const Vec3& a = acc[end - 1];
    d.X(r, window + 0) = v.x;
    d.X(r, window + 1) = v.y;
    d.X(r, window + 2) = v.z;
    d.X(r, window + 3) = a.x;
    d.X(r, window + 4) = a.y;
    d.X(r, window + 5) = a.z;
    for (int h = 0; h < horizon; ++h) d.Y(r, h) = u[end + h] - anchor;
    d.anchors[r] = anchor;
    d.anchor_slots[r] = end - 1;
  }
  return d;
}

/// Time-ordered split of a window dataset into a training block and a
/// later calibration block, separated by an embargo of `gap` rows so the
/// calibration futures do not overlap the training windows.
struct DatasetSplit {
  Eigen::MatrixXd x_train, y_train, x_cal, y_cal;
  bool has_cal = false;
};

inline DatasetSplit split_for_calibration(const WindowDataset& d, double train_frac, int gap) {
  const int n = static_cast<int>(d.X.rows());
  DatasetSplit s;
  int n_train = std::max(2, static_cast<int>(n * train_frac));
  int cal_begin = n_train + std::max(0, gap);
  int n_cal = n - cal_begin;
  if (n_cal < 4) {  // too short to hold out: train on everything
    s.x_train = d.X;
    s.y_train = d.Y;
    return s;
  }
  s.x_train = d.X.topRows(n_train);
  s.y_train = d.Y.topRows(n_train);
  s.x_cal = d.X.bottomRows(n_cal);
  s.y_cal = d.Y.bottomRows(n_cal);
  s.has_cal = true;
  return s;
}

/// Per-component Gaussian MSI distribution at one slot: position (x, y, z)
/// and attitude (yaw, pitch, roll) means and variances.
struct MsiDistribution {
  std::array<double, 3> pos_mean{{0, 0, 0}};
  std::array<double, 3> pos_var{{0, 0, 0}};
  std::array<double, 3> att_mean{{0, 0, 0}};
  std::array<double, 3> att_var{{0, 0, 0}};

  static MsiDistribution point(const UavState& s) {
    MsiDistribution d;
    d.pos_mean = {s.position.x, s.position.y, s.position.z};
    d.att_mean = {s.attitude.yaw, s.attitude.pitch, s.attitude.roll};
    return d;
  }

  UavState sample(Rng& rng) const {
    UavState s;
    s.position = {sample1_(rng, pos_mean[0], pos_var[0]), sample1_(rng, pos_mean[1], pos_var[1]),
                  sample1_(rng, pos_mean[2], pos_var[2])};
    s.attitude.yaw = wrap_pi(sample1_(rng, att_mean[0], att_var[0]));
    s.attitude.pitch = wrap_pi(sample1_(rng, att_mean[1], att_var[1]));
    s.attitude.roll = wrap_pi(sample1_(rng, att_mean[2], att_var[2]));
    return s;
  }

  UavState mean_state() const {
    UavState s;
    s.position = {pos_mean[0], pos_mean[1], pos_mean[2]};
    s.attitude = {wrap_pi(att_mean[0]), wrap_pi(att_mean[1]), wrap_pi(att_mean[2])};
    return s;
  }

 private:
  static double sample1_(Rng& rng, double mean, double var) {
    return var > 0.0 ? rng.normal(mean, std::sqrt(var)) : mean;
  }
};

/// Beam-angle estimate: mean angles plus centered error ranges holding the
/// requested probability mass.
struct AngleEstimate {
  double az_mean = 0.0, az_lo = 0.0, az_hi = 0.0;
  double el_mean = 0.0, el_lo = 0.0, el_hi = 0.0;
  double p_az = 1.0, p_el = 1.0;

  static AngleEstimate exact(const AnglePair& a) {
    return {a.az, a.az, a.az, a.el, a.el, a.el, 1.0, 1.0};
  }
};

namespace detail {
/// Smallest half-width whose centered interval holds fraction p of the
/// absolute deviations.
inline double centered_quantile(std::vector<double>& abs_dev, double p) {
  if (abs_dev.empty()) return 0.0;
  std::sort(abs_dev.begin(), abs_dev.end());
  size_t k = static_cast<size_t>(std::ceil(p * abs_dev.size()));
  if (k == 0) k = 1;
  if (k > abs_dev.size()) k = abs_dev.size();
  return abs_dev[k - 1];
}
}  // namespace detail

/// Which end's beam angle the bound is for.
enum class AngleEnd { Aod, Aoa };

/// Monte-Carlo beam-angle error bounding: draw joint MSI samples for both
/// ends, map each through the frame geometry, and report the sample mean and
/// centered intervals holding fractions p_az / p_el of the samples.
inline AngleEstimate bound_tracking_error(const MsiDistribution& tx, const MsiDistribution& rx,
                                          const MountingPose& tx_mount,
                                          const MountingPose& rx_mount, AngleEnd end,
                                          int i_max, double p_az, double p_el, Rng& rng) {
  if (i_max < 100) throw std::invalid_argument("bound_tracking_error: need i_max >= 100");
  std::vector<double> az(i_max), el(i_max);
  double cos_sum = 0.0, sin_sum = 0.0, el_sum = 0.0;
  for (int i = 0; i < i_max; ++i) {
    UavState st = tx.sample(rng);
    UavState sr = rx.sample(rng);
    LinkAngles la = geometric_angles(st, sr, tx_mount, rx_mount);
    const AnglePair& a = end == AngleEnd::Aod ? la.aod : la.aoa;
    az[i] = a.az;
    el[i] = a.el;
    cos_sum += std::cos(a.az);
    sin_sum += std::sin(a.az);
    el_sum += a.el;
  }
  AngleEstimate est;
  est.p_az = p_az;
  est.p_el = p_el;
  // circular mean for azimuth; elevation lives in [0, pi] and averages plainly
  est.az_mean = wrap_two_pi(std::atan2(sin_sum, cos_sum));
  est.el_mean = el_sum / i_max;

  std::vector<double> dev(i_max);
  for (int i = 0; i < i_max; ++i) dev[i] = std::fabs(wrap_pi(az[i] - est.az_mean));
  double haz = detail::centered_quantile(dev, p_az);
  for (int i = 0; i < i_max; ++i) dev[i] = std::fabs(el[i] - est.el_mean);
  double hel = detail::centered_quantile(dev, p_el);
  est.az_lo = est.az_mean - haz;
  est.az_hi = est.az_mean + haz;
  est.el_lo = est.el_mean - hel;
  est.el_hi = est.el_mean + hel;
  return est;
}

}  // namespace ccatrack
