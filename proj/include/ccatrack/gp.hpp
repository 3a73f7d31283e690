// Gaussian-process regression with a squared-exponential ARD kernel, shared
// across output columns (the horizon steps of one MSI component). Inputs and
// outputs are standardized internally; hyperparameters maximize the marginal
// likelihood by Adam in log space with restarts.
#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cstdio>
#include <ostream>
#include <string>

#include "ccatrack/angles.hpp"
#include "ccatrack/rng.hpp"

namespace ccatrack {

struct GpConfig {
  int max_train = 96;    // training rows kept (evenly subsampled beyond this)
  int opt_iters = 80;
  int restarts = 1;      // random restarts beyond the heuristic init
  double learn_rate = 0.08;
  double jitter = 1e-8;
  double min_noise_sd = 1e-3;   // floor on the standardized noise scale
  double init_noise_sd = 0.1;   // heuristic-start noise scale
  std::uint64_t seed = 1;
};

class GpModel {
 public:
  /// Fit hyperparameters and the posterior factorization on (X, Y).
  /// X: n x d inputs (rows = lagged windows), Y: n x q outputs.
  static GpModel fit(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                     const GpConfig& cfg = GpConfig{}) {
    if (X.rows() < 2) throw std::invalid_argument("gp_fit: need at least 2 training pairs");
    if (X.rows() != Y.rows()) throw std::invalid_argument("gp_fit: X/Y row mismatch");
    GpModel m;
    m.cfg_ = cfg;
    m.set_data_(X, Y);

    const int d = static_cast<int>(m.Xs_.cols());
    Rng rng(cfg.seed);

    // heuristic start: unit lengthscales on standardized inputs, unit signal,
    // a tenth of the output scale as noise
    Eigen::VectorXd theta0(d + 2);
    theta0.setZero();
    theta0(d) = 0.0;  // log sigma_f
    theta0(d + 1) = std::log(std::max(cfg.init_noise_sd, cfg.min_noise_sd));
    Eigen::VectorXd best = m.optimize_(theta0);
    double best_ll = m.log_marginal_(best);

    for (int r = 0; r < cfg.restarts; ++r) {
      Eigen::VectorXd t(d + 2);
      for (int i = 0; i < d; ++i) t(i) = rng.uniform(-1.0, 2.0);
      t(d) = rng.uniform(-1.0, 1.0);
      t(d + 1) = rng.uniform(-3.0, -0.5);
      Eigen::VectorXd cand = m.optimize_(t);
      double ll = m.log_marginal_(cand);
      if (ll > best_ll) {
        best_ll = ll;
        best = cand;
      }
    }
    m.theta_ = best;
    m.factorize_();
    return m;
  }

  /// Replace the training data keeping the fitted hyperparameters.
  void refit_data(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
    if (X.rows() < 2) throw std::invalid_argument("gp refit: need at least 2 training pairs");
    set_data_(X, Y);
    factorize_();
  }

  int input_dim() const { return static_cast<int>(Xs_.cols()); }
  int output_dim() const { return static_cast<int>(Y_.cols()); }

  /// Posterior mean per output column and the predictive variance per column
  /// (function variance + noise, de-standardized). This is the exact
  /// posterior of the shared kernel.
  std::pair<Eigen::VectorXd, Eigen::VectorXd> predict(const Eigen::VectorXd& x) const {
    return predict_impl_(x, false);
  }

  /// Same mean, with per-column variance calibration factors applied. The
  /// shared kernel spreads one noise scale over all horizon columns; the
  /// calibration factors restore per-column dispersion, which the error
  /// bands need. Factors come from leave-one-out residuals by default and
  /// from a time-separated holdout when calibrate() is called.
  std::pair<Eigen::VectorXd, Eigen::VectorXd> predict_calibrated(const Eigen::VectorXd& x) const {
    return predict_impl_(x, true);
  }

  /// Recompute the per-column variance factors from holdout pairs: the mean
  /// squared normalized residual of the exact posterior, floored at 1.
  void calibrate(const Eigen::MatrixXd& Xc, const Eigen::MatrixXd& Yc) {
    if (Xc.rows() != Yc.rows() || Xc.rows() < 1)
      throw std::invalid_argument("gp calibrate: bad holdout shape");
    const int q = output_dim();
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(q);
    for (int i = 0; i < Xc.rows(); ++i) {
      auto [mean, var] = predict_impl_(Xc.row(i).transpose(), false);
      for (int c = 0; c < q; ++c) {
        double r = Yc(i, c) - mean(c);
        acc(c) += r * r / std::max(var(c), 1e-30);
      }
    }
    for (int c = 0; c < q; ++c) loo_lambda_(c) = std::max(1.0, acc(c) / Xc.rows());
  }

  double log_marginal() const { return log_marginal_(theta_); }

  Eigen::VectorXd hyperparameters() const { return theta_; }

  /// Marginal likelihood at explicit hyperparameters (optimization oracle).
  double log_marginal_at(const Eigen::VectorXd& theta) const { return log_marginal_(theta); }

  /// Structured-text dump: hyperparameters plus a digest of the training set.
  void dump(std::ostream& os) const {
    char buf[64];
    os << "ccatrack-gp v1\n";
    os << "dims n=" << Xs_.rows() << " d=" << Xs_.cols() << " q=" << Y_.cols() << "\n";
    os << "theta";
    for (int i = 0; i < theta_.size(); ++i) {
      std::snprintf(buf, sizeof buf, " %.17g", theta_(i));
      os << buf;
    }
    os << "\n";
    std::snprintf(buf, sizeof buf, "train_digest %016llx\n",
                  static_cast<unsigned long long>(train_digest_));
    os << buf;
  }

 private:
  void set_data_(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
    if (!X.allFinite() || !Y.allFinite())
      throw std::runtime_error("gp: non-finite training data");
    Eigen::MatrixXd Xk = X, Yk = Y;
    if (X.rows() > cfg_.max_train) {
      // evenly spaced subsample, always keeping the most recent row
      const int n = static_cast<int>(X.rows());
      Xk.resize(cfg_.max_train, X.cols());
      Yk.resize(cfg_.max_train, Y.cols());
      for (int i = 0; i < cfg_.max_train; ++i) {
        int src = (i * (n - 1)) / (cfg_.max_train - 1);
        Xk.row(i) = X.row(src);
        Yk.row(i) = Y.row(src);
      }
    }
    x_mean_ = Xk.colwise().mean();
    x_std_.resize(Xk.cols());
    for (int j = 0; j < Xk.cols(); ++j) {
      double s = std::sqrt((Xk.col(j).array() - x_mean_(j)).square().mean());
      x_std_(j) = s > 1e-12 ? s : 1.0;
    }
    Xs_ = (Xk.rowwise() - x_mean_.transpose()).array().rowwise() / x_std_.transpose().array();
    y_mean_ = Yk.colwise().mean();
    y_std_.resize(Yk.cols());
    for (int j = 0; j < Yk.cols(); ++j) {
      double s = std::sqrt((Yk.col(j).array() - y_mean_(j)).square().mean());
      y_std_(j) = s > 1e-12 ? s : 1.0;
    }
    Y_ = (Yk.rowwise() - y_mean_.transpose()).array().rowwise() / y_std_.transpose().array();
    train_digest_ = digest_(Xk, Yk);
  }

  double kernel_(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    return kernel_theta_(a, b, theta_);
  }

  static double kernel_theta_(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                              const Eigen::VectorXd& theta) {
    const int d = static_cast<int>(a.size());
    double s = 0.0;
    for (int i = 0; i < d; ++i) {
      double l = std::exp(theta(i));
      double u = (a(i) - b(i)) / l;
      s += u * u;
    }
    double sf2 = std::exp(2.0 * theta(d));
    return sf2 * std::exp(-0.5 * s);
  }

  Eigen::MatrixXd kernel_matrix_(const Eigen::VectorXd& theta) const {
    const int n = static_cast<int>(Xs_.rows());
    double sn2 = std::exp(2.0 * theta(theta.size() - 1));
    Eigen::MatrixXd K(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j) {
        double v = kernel_theta_(Xs_.row(i).transpose(), Xs_.row(j).transpose(), theta);
        K(i, j) = v;
        K(j, i) = v;
      }
    K.diagonal().array() += sn2 + cfg_.jitter;
    return K;
  }

  double log_marginal_(const Eigen::VectorXd& theta) const {
    Eigen::MatrixXd K = kernel_matrix_(theta);
    Eigen::LLT<Eigen::MatrixXd> llt(K);
    if (llt.info() != Eigen::Success) return -1e300;
    Eigen::MatrixXd alpha = llt.solve(Y_);
    const int n = static_cast<int>(Y_.rows());
    const int q = static_cast<int>(Y_.cols());
    double quad = (Y_.array() * alpha.array()).sum();
    double logdet = 0.0;
    for (int i = 0; i < n; ++i) logdet += std::log(llt.matrixL()(i, i));
    logdet *= 2.0;
    return -0.5 * quad - 0.5 * q * logdet - 0.5 * n * q * std::log(2.0 * kPi);
  }

  /// Adam ascent on the marginal likelihood, returning the best iterate.
  Eigen::VectorXd optimize_(Eigen::VectorXd theta) const {
    const int d = static_cast<int>(Xs_.cols());
    const int n = static_cast<int>(Xs_.rows());
    const int q = static_cast<int>(Y_.cols());
    Eigen::VectorXd m1 = Eigen::VectorXd::Zero(theta.size());
    Eigen::VectorXd m2 = Eigen::VectorXd::Zero(theta.size());
    Eigen::VectorXd best = theta;
    double best_ll = log_marginal_(theta);

    for (int it = 1; it <= cfg_.opt_iters; ++it) {
      Eigen::MatrixXd K = kernel_matrix_(theta);
      Eigen::LLT<Eigen::MatrixXd> llt(K);
      if (llt.info() != Eigen::Success) break;
      Eigen::MatrixXd alpha = llt.solve(Y_);
      Eigen::MatrixXd Kinv = llt.solve(Eigen::MatrixXd::Identity(n, n));
      // W = alpha alpha^T - q * K^{-1}; dL/dtheta_j = 0.5 tr(W dK/dtheta_j)
      Eigen::MatrixXd W = alpha * alpha.transpose() - double(q) * Kinv;

      double sn2 = std::exp(2.0 * theta(d + 1));
      Eigen::MatrixXd Kf(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) {
          double v = kernel_theta_(Xs_.row(i).transpose(), Xs_.row(j).transpose(), theta);
          Kf(i, j) = v;
          Kf(j, i) = v;
        }

      Eigen::VectorXd grad(theta.size());
      for (int p = 0; p < d; ++p) {
        double l = std::exp(theta(p));
        double acc = 0.0;
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            double u = (Xs_(i, p) - Xs_(j, p)) / l;
            acc += W(i, j) * Kf(i, j) * u * u;
          }
        grad(p) = 0.5 * acc;
      }
      grad(d) = (W.array() * Kf.array()).sum();          // d/dlog sf: 2 Kf -> 0.5*tr = sum
      grad(d + 1) = sn2 * W.trace();                     // d/dlog sn: 2 sn2 I

      for (int i = 0; i < theta.size(); ++i) {
        m1(i) = 0.9 * m1(i) + 0.1 * grad(i);
        m2(i) = 0.999 * m2(i) + 0.001 * grad(i) * grad(i);
        double mh = m1(i) / (1.0 - std::pow(0.9, it));
        double vh = m2(i) / (1.0 - std::pow(0.999, it));
        theta(i) += cfg_.learn_rate * mh / (std::sqrt(vh) + 1e-9);
      }
      // keep the parameters in a sane box
      for (int i = 0; i < d; ++i) theta(i) = std::clamp(theta(i), -4.0, 6.0);
      theta(d) = std::clamp(theta(d), -6.0, 6.0);
      theta(d + 1) = std::clamp(theta(d + 1), std::log(cfg_.min_noise_sd), 3.0);

      double ll = log_marginal_(theta);
      if (ll > best_ll) {
        best_ll = ll;
        best = theta;
      }
    }
    return best;
  }

  std::pair<Eigen::VectorXd, Eigen::VectorXd> predict_impl_(const Eigen::VectorXd& x,
                                                            bool calibrated) const {
    if (x.size() != x_mean_.size()) throw std::invalid_argument("gp_predict: dimension mismatch");
    Eigen::VectorXd xs = (x - x_mean_).cwiseQuotient(x_std_);
    const int n = static_cast<int>(Xs_.rows());
    Eigen::VectorXd k(n);
    for (int i = 0; i < n; ++i) k(i) = kernel_(xs, Xs_.row(i).transpose());
    Eigen::VectorXd mean_s = k.transpose() * alpha_;
    Eigen::VectorXd v = llt_.solve(k);
    double sf2 = std::exp(2.0 * theta_(theta_.size() - 2));
    double sn2 = std::exp(2.0 * theta_(theta_.size() - 1));
    double var_s = std::max(0.0, sf2 + sn2 - k.dot(v));
    const int q = output_dim();
    Eigen::VectorXd mean(q), var(q);
    for (int c = 0; c < q; ++c) {
      mean(c) = y_mean_(c) + y_std_(c) * mean_s(c);
      double scale = calibrated ? loo_lambda_(c) : 1.0;
      var(c) = var_s * scale * y_std_(c) * y_std_(c);
    }
    return {mean, var};
  }

  void factorize_() {
    Eigen::MatrixXd K = kernel_matrix_(theta_);
    Eigen::LLT<Eigen::MatrixXd> llt(K);
    double extra = std::max(cfg_.jitter, 1e-12);
    while (llt.info() != Eigen::Success && extra < 1e-4) {
      extra *= 100.0;
      Eigen::MatrixXd K2 = K;
      K2.diagonal().array() += extra;
      llt.compute(K2);
    }
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("gp: kernel matrix not positive definite (insufficient jitter)");
    llt_ = llt;
    alpha_ = llt_.solve(Y_);

    // per-column LOO calibration: lambda_c = mean_i(r_ic^2 / v_i) with
    // r_ic = alpha_ic / Kinv_ii and v_i = 1 / Kinv_ii, floored at 1
    const int n = static_cast<int>(Y_.rows());
    const int q = static_cast<int>(Y_.cols());
    Eigen::MatrixXd kinv = llt_.solve(Eigen::MatrixXd::Identity(n, n));
    loo_lambda_ = Eigen::VectorXd::Ones(q);
    for (int c = 0; c < q; ++c) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += alpha_(i, c) * alpha_(i, c) / kinv(i, i);
      loo_lambda_(c) = std::max(1.0, acc / n);
    }
  }

  static std::uint64_t digest_(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a over formatted entries
    auto mix = [&h](double v) {
      char buf[32];
      int len = std::snprintf(buf, sizeof buf, "%.17g", v);
      for (int i = 0; i < len; ++i) {
        h ^= static_cast<unsigned char>(buf[i]);
        h *= 1099511628211ull;
      }
    };
    for (int i = 0; i < X.rows(); ++i)
      for (int j = 0; j < X.cols(); ++j) mix(X(i, j));
    for (int i = 0; i < Y.rows(); ++i)
      for (int j = 0; j < Y.cols(); ++j) mix(Y(i, j));
    return h;
  }

  GpConfig cfg_;
  Eigen::MatrixXd Xs_, Y_;
  Eigen::VectorXd x_mean_, x_std_, y_mean_, y_std_;
  Eigen::VectorXd theta_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::MatrixXd alpha_;
  Eigen::VectorXd loo_lambda_;
  std::uint64_t train_digest_ = 0;
};

/// Mean +- 3 sigma band.
inline std::pair<double, double> prediction_error_band(double mean, double variance) {
  double half = 3.0 * std::sqrt(std::max(0.0, variance));
  return {mean - half, mean + half};
}

}  // namespace ccatrack
