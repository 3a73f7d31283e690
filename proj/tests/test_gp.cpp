#include "doctest.h"

#include <sstream>

#include "ccatrack/gp.hpp"

using namespace ccatrack;

TEST_CASE("two-point closed-form posterior") {
  // scalar inputs x1 = 0, x2 = 1, outputs y1 = 1, y2 = 2; the hand-inverted
  // 2x2 system is the oracle. The model standardizes internally, so the
  // oracle works on the standardized quantities and the comparison is made on
  // the de-standardized results.
  Eigen::MatrixXd X(2, 1), Y(2, 1);
  X << 0.0, 1.0;
  Y << 1.0, 2.0;
  GpConfig cfg;
  cfg.opt_iters = 0;  // keep the heuristic start: unit lengthscale/signal on
  cfg.restarts = 0;   // standardized inputs, noise sd 0.1
  cfg.jitter = 0.0;
  GpModel m = GpModel::fit(X, Y, cfg);

  // reproduce the standardization: x_std = 0.5, y_std = 0.5 (population std)
  double xs1 = -1.0, xs2 = 1.0;  // (0 - 0.5)/0.5, (1 - 0.5)/0.5
  double ys1 = -1.0, ys2 = 1.0;
  double sf2 = 1.0, sn2 = 0.01, l = 1.0;
  auto k = [&](double a, double b) { return sf2 * std::exp(-0.5 * (a - b) * (a - b) / (l * l)); };

  double x_test = 0.25;
  double xst = (x_test - 0.5) / 0.5;
  // K = [[sf2+sn2, k12], [k12, sf2+sn2]]
  double k11 = sf2 + sn2, k12 = k(xs1, xs2);
  double det = k11 * k11 - k12 * k12;
  double i11 = k11 / det, i12 = -k12 / det;
  double kA = k(xst, xs1), kB = k(xst, xs2);
  double a1 = i11 * ys1 + i12 * ys2;
  double a2 = i12 * ys1 + i11 * ys2;
  double mean_s = kA * a1 + kB * a2;
  double q1 = i11 * kA + i12 * kB, q2 = i12 * kA + i11 * kB;
  double var_s = sf2 + sn2 - (kA * q1 + kB * q2);
  double mean_expect = 1.5 + 0.5 * mean_s;
  double var_expect = var_s * 0.25;

  auto [mean, var] = m.predict(Eigen::VectorXd::Constant(1, x_test));
  CHECK(mean(0) == doctest::Approx(mean_expect).epsilon(1e-10));
  CHECK(var(0) == doctest::Approx(var_expect).epsilon(1e-10));
}

TEST_CASE("interpolation at training points") {
  Eigen::MatrixXd X(5, 1), Y(5, 1);
  for (int i = 0; i < 5; ++i) {
    X(i, 0) = i;
    Y(i, 0) = std::sin(0.8 * i);
  }
  GpConfig cfg;
  cfg.opt_iters = 0;
  cfg.restarts = 0;
  cfg.min_noise_sd = 1e-6;
  cfg.jitter = 1e-12;
  GpModel m = GpModel::fit(X, Y, cfg);
  for (int i = 0; i < 5; ++i) {
    auto [mean, var] = m.predict(Eigen::VectorXd::Constant(1, double(i)));
    CHECK(mean(0) == doctest::Approx(Y(i, 0)).epsilon(0.05));
    CHECK(var(0) >= 0.0);
  }
}

TEST_CASE("constant outputs give constant predictions with near-zero spread") {
  Eigen::MatrixXd X(6, 2), Y(6, 1);
  for (int i = 0; i < 6; ++i) {
    X(i, 0) = i;
    X(i, 1) = 2.0 * i;
    Y(i, 0) = 3.25;
  }
  GpModel m = GpModel::fit(X, Y, GpConfig{});
  Eigen::VectorXd x(2);
  x << 2.5, 5.0;
  auto [mean, var] = m.predict(x);
  CHECK(mean(0) == doctest::Approx(3.25).epsilon(1e-9));
  CHECK(var(0) < 1e-4);  // y_std collapses to the guard value
}

TEST_CASE("noiseless linear trend is learned to < 1%") {
  Eigen::MatrixXd X(40, 1), Y(40, 1);
  for (int i = 0; i < 40; ++i) {
    X(i, 0) = 0.1 * i;
    Y(i, 0) = 2.0 + 0.5 * X(i, 0);
  }
  GpConfig cfg;
  cfg.opt_iters = 120;
  cfg.restarts = 1;
  cfg.seed = 5;
  GpModel m = GpModel::fit(X, Y, cfg);
  for (double x = 0.5; x < 3.5; x += 0.7) {
    auto [mean, var] = m.predict(Eigen::VectorXd::Constant(1, x));
    double truth = 2.0 + 0.5 * x;
    CHECK(std::fabs(mean(0) - truth) / truth < 0.01);
  }
}

TEST_CASE("far from the data the variance recovers the prior scale") {
  Eigen::MatrixXd X(8, 1), Y(8, 1);
  for (int i = 0; i < 8; ++i) {
    X(i, 0) = i * 0.25;
    Y(i, 0) = std::cos(i * 0.25);
  }
  GpConfig cfg;
  cfg.opt_iters = 0;
  cfg.restarts = 0;
  GpModel m = GpModel::fit(X, Y, cfg);
  auto [mean_far, var_far] = m.predict(Eigen::VectorXd::Constant(1, 400.0));
  auto [mean_near, var_near] = m.predict(Eigen::VectorXd::Constant(1, 0.5));
  CHECK(var_far(0) > var_near(0));
  // standardized prior variance is sf2 + sn2 = 1.01; de-standardized by y_std^2
  double y_std2 = 0.0, y_mean = 0.0;
  for (int i = 0; i < 8; ++i) y_mean += Y(i, 0) / 8.0;
  for (int i = 0; i < 8; ++i) y_std2 += (Y(i, 0) - y_mean) * (Y(i, 0) - y_mean) / 8.0;
  CHECK(var_far(0) == doctest::Approx(1.01 * y_std2).epsilon(1e-6));
}

TEST_CASE("optimized likelihood beats random hyperparameter draws") {
  Rng rng(99);
  Eigen::MatrixXd X(30, 2), Y(30, 2);
  for (int i = 0; i < 30; ++i) {
    X(i, 0) = rng.uniform(0.0, 4.0);
    X(i, 1) = rng.uniform(-1.0, 1.0);
    Y(i, 0) = std::sin(X(i, 0)) + 0.3 * X(i, 1) + rng.normal(0.0, 0.05);
    Y(i, 1) = 0.5 * X(i, 0) - X(i, 1) + rng.normal(0.0, 0.05);
  }
  GpConfig cfg;
  cfg.opt_iters = 100;
  cfg.restarts = 2;
  cfg.seed = 11;
  GpModel m = GpModel::fit(X, Y, cfg);
  double fitted = m.log_marginal();
  for (int t = 0; t < 100; ++t) {
    Eigen::VectorXd theta(4);
    theta(0) = rng.uniform(-3.0, 4.0);
    theta(1) = rng.uniform(-3.0, 4.0);
    theta(2) = rng.uniform(-3.0, 3.0);
    theta(3) = rng.uniform(-6.0, 2.0);
    CHECK(fitted >= m.log_marginal_at(theta) - 1e-9);
  }
}

TEST_CASE("posterior variance stays nonnegative") {
  Rng rng(4);
  Eigen::MatrixXd X(25, 3), Y(25, 1);
  for (int i = 0; i < 25; ++i) {
    for (int j = 0; j < 3; ++j) X(i, j) = rng.normal(0.0, 1.0);
    Y(i, 0) = X(i, 0) * X(i, 1) - X(i, 2);
  }
  GpModel m = GpModel::fit(X, Y, GpConfig{});
  for (int t = 0; t < 100; ++t) {
    Eigen::VectorXd x(3);
    for (int j = 0; j < 3; ++j) x(j) = rng.normal(0.0, 2.0);
    auto [mean, var] = m.predict(x);
    CHECK(var(0) >= 0.0);
  }
}

TEST_CASE("multi-column outputs share the factorization") {
  Eigen::MatrixXd X(12, 1), Y(12, 3);
  for (int i = 0; i < 12; ++i) {
    X(i, 0) = i * 0.3;
    Y(i, 0) = std::sin(X(i, 0));
    Y(i, 1) = std::cos(X(i, 0));
    Y(i, 2) = 0.2 * X(i, 0);
  }
  GpModel m = GpModel::fit(X, Y, GpConfig{});
  auto [mean, var] = m.predict(Eigen::VectorXd::Constant(1, 1.0));
  CHECK(mean.size() == 3);
  CHECK(var.size() == 3);
}

TEST_CASE("refit_data keeps hyperparameters, dump is stable") {
  Eigen::MatrixXd X(15, 1), Y(15, 1);
  for (int i = 0; i < 15; ++i) {
    X(i, 0) = i * 0.2;
    Y(i, 0) = std::sin(X(i, 0));
  }
  GpModel m = GpModel::fit(X, Y, GpConfig{});
  Eigen::VectorXd theta = m.hyperparameters();
  Eigen::MatrixXd X2 = X.array() + 0.05;
  m.refit_data(X2, Y);
  CHECK((m.hyperparameters() - theta).norm() == doctest::Approx(0.0));

  std::ostringstream a, b;
  m.dump(a);
  m.dump(b);
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("ccatrack-gp v1\n", 0) == 0);
}

TEST_CASE("singular kernel handling") {
  // duplicated inputs with conflicting outputs and no noise: the jitter
  // escalation rescues the PSD-degenerate kernel instead of failing
  Eigen::MatrixXd X(4, 1), Y(4, 1);
  X << 1.0, 1.0, 1.0, 1.0;
  Y << 0.0, 1.0, -1.0, 2.0;
  GpConfig cfg;
  cfg.opt_iters = 0;
  cfg.restarts = 0;
  cfg.jitter = 0.0;
  cfg.min_noise_sd = 1e-300;
  cfg.init_noise_sd = 1e-300;
  GpModel rescued = GpModel::fit(X, Y, cfg);
  auto [mean, var] = rescued.predict(Eigen::VectorXd::Constant(1, 1.0));
  CHECK(std::isfinite(mean(0)));

  // an unfactorizable kernel (non-finite input) is a diagnosable error
  Eigen::MatrixXd Xbad = X;
  Xbad(2, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(GpModel::fit(Xbad, Y, cfg), std::runtime_error);

  CHECK_THROWS(GpModel::fit(Eigen::MatrixXd(1, 1), Eigen::MatrixXd(1, 1), GpConfig{}));
}

TEST_CASE("prediction error band") {
  auto [lo0, hi0] = prediction_error_band(2.0, 0.0);
  CHECK(lo0 == doctest::Approx(2.0));
  CHECK(hi0 == doctest::Approx(2.0));
  auto [lo1, hi1] = prediction_error_band(0.0, 1.0);
  CHECK(hi1 - lo1 == doctest::Approx(6.0));
}
