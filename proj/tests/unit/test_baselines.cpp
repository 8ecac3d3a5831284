#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <random>

#include "phmprep/baselines/autoencoder.hpp"
#include "phmprep/baselines/pca.hpp"
#include "support/helpers.hpp"
#include "support/oracles.hpp"

using namespace phmprep;
constexpr auto code_of = testing_support::error_code_of;

namespace {

Matrix gaussian(std::size_t rows, std::size_t cols, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  Matrix m(rows, cols);
  for (auto& v : m.data()) v = n(rng) * scale;
  return m;
}

std::vector<double> eigen_oracle(const Matrix& x) {
  Eigen::MatrixXd e(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) e(r, c) = x(r, c);
  const Eigen::MatrixXd centered = e.rowwise() - e.colwise().mean();
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(x.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  std::vector<double> v(solver.eigenvalues().data(), solver.eigenvalues().data() + cov.rows());
  std::sort(v.rbegin(), v.rend());
  return v;
}

}  // namespace

TEST(Pca, EigenvaluesMatchEigen) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Matrix x = gaussian(20, 6, seed, 1.0 + static_cast<double>(seed % 4));
    for (std::size_t r = 0; r < 20; ++r) x(r, 1) = x(r, 0) * 2 + x(r, 1) * 0.1;
    const PcaModel m = fit_pca(x);
    const auto expected = eigen_oracle(x);
    for (std::size_t j = 0; j < 6; ++j) EXPECT_NEAR(m.eigenvalues[j], std::max(expected[j], 0.0), 1e-8);
  }
}

TEST(Pca, LineDataIsRankOne) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  Matrix x(500, 2);
  for (std::size_t r = 0; r < 500; ++r) {
    const double t = n(rng) * 3;
    x(r, 0) = t + n(rng) * 0.05;
    x(r, 1) = t + n(rng) * 0.05;
  }
  EXPECT_GT(fit_pca(x).explained_variance_ratio[0], 0.99);
}

TEST(Pca, IsotropicRatios) {
  const PcaModel m = fit_pca(gaussian(10000, 3, 2));
  for (double r : m.explained_variance_ratio) EXPECT_NEAR(r, 1.0 / 3.0, 0.05);
}

TEST(Pca, FullProjectionRoundTrips) {
  const Matrix x = gaussian(40, 5, 3, 4.0);
  const PcaModel m = fit_pca(x);
  const Matrix back = reconstruct(m, project(m, 5, x));
  for (std::size_t i = 0; i < x.data().size(); ++i) EXPECT_NEAR(back.data()[i], x.data()[i], 1e-8);
}

TEST(Pca, CurveAndSelection) {
  PcaModel m;
  m.mean = {0, 0, 0};
  m.eigenvalues = {6, 3, 1};
  m.explained_variance_ratio = {0.6, 0.3, 0.1};
  EXPECT_EQ(select_components(m, 0.9), 2u);
  EXPECT_EQ(select_components(m, 1.0), 3u);
  EXPECT_EQ(select_components(m, 0.5), 1u);
  EXPECT_EQ(code_of([&] { select_components(m, 0.0); }), Errc::InvalidArgument);

  const PcaModel fitted = fit_pca(gaussian(60, 8, 4));
  const auto cum = fitted.cumulative_ratio();
  for (std::size_t j = 1; j < cum.size(); ++j) EXPECT_GE(cum[j], cum[j - 1]);
  EXPECT_EQ(cum.back(), 1.0);
  std::size_t previous = 0;
  for (double t = 0.05; t <= 1.0; t += 0.05) {
    const std::size_t k = select_components(fitted, t);
    EXPECT_GE(k, previous);
    previous = k;
  }
}

TEST(Pca, Errors) {
  EXPECT_EQ(code_of([] { fit_pca(Matrix()); }), Errc::EmptyInput);
  Matrix bad(2, 2, std::vector<double>{1, kMissing, 2, 3});
  EXPECT_EQ(code_of([&] { fit_pca(bad); }), Errc::MissingValues);
  const PcaModel m = fit_pca(gaussian(10, 2, 1));
  EXPECT_EQ(code_of([&] { project(m, 3, Matrix(1, 2)); }), Errc::KTooLarge);
  EXPECT_EQ(code_of([&] { project(m, 1, Matrix(1, 3)); }), Errc::FeatureMismatch);
}

TEST(Autoencoder, RankOneDataCompresses) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  const std::vector<double> direction{0.5, -1.0, 0.8, 0.3};
  Matrix x(400, 4);
  for (std::size_t r = 0; r < 400; ++r) {
    const double t = n(rng);
    for (std::size_t c = 0; c < 4; ++c) x(r, c) = t * direction[c];
  }
  double variance = 0;
  for (double v : x.data()) variance += v * v;
  variance /= static_cast<double>(x.data().size());
  MlpParams p{{}, 0.05, 16, 40, 1};
  const AeModel m = train_autoencoder(x, 1, p, Activation::identity);
  EXPECT_LT(m.loss_curve.back(), 0.05 * variance);
  EXPECT_EQ(encode(m, x).cols(), 1u);
}

TEST(Autoencoder, FullLatentNearIdentity) {
  const Matrix x = gaussian(300, 3, 6);
  MlpParams p{{}, 0.05, 16, 60, 2};
  const AeModel m = train_autoencoder(x, 3, p, Activation::identity);
  const auto errors = reconstruction_errors(m, x);
  double mean = 0;
  for (double e : errors) mean += e;
  EXPECT_LT(mean / static_cast<double>(errors.size()), 1e-3);
}

TEST(Autoencoder, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n;
  for (Activation act : {Activation::relu, Activation::sigmoid, Activation::identity}) {
    const Network net(autoencoder_shapes(8, 3, act), 40);
    ASSERT_LE(net.parameter_count(), 200u);
    std::vector<double> x(8);
    for (auto& v : x) v = n(rng);
    std::vector<double> grad(net.parameter_count(), 0.0);
    Network::Trace t;
    net.accumulate_gradient(x, x, Loss::mean_squared_error, grad, t);
    const auto numeric =
        oracle::numeric_gradient(net, [&](const Network& m) { return m.sample_loss(x, x, Loss::mean_squared_error); });
    for (std::size_t i = 0; i < grad.size(); ++i) EXPECT_LT(oracle::relative_error(grad[i], numeric[i]), 1e-4);
  }
}

TEST(Autoencoder, InputErrors) {
  MlpParams p;
  EXPECT_EQ(code_of([&] { train_autoencoder(Matrix(), 1, p); }), Errc::EmptyInput);
  EXPECT_EQ(code_of([&] { train_autoencoder(gaussian(5, 2, 1), 3, p); }), Errc::InvalidArgument);
}

TEST(Threshold, SeparatedClusters) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-0.01, 0.01);
  std::vector<double> errors;
  std::vector<int> labels;
  for (int i = 0; i < 200; ++i) {
    labels.push_back(i % 2);
    errors.push_back((i % 2 ? 0.9 : 0.1) + u(rng));
  }
  const double t = choose_error_threshold(errors, labels);
  EXPECT_GT(t, 0.12);
  EXPECT_LT(t, 0.88);
  EXPECT_EQ(classify_errors(errors, t), labels);
}

TEST(Threshold, InterleavedFallsToPrior) {
  std::vector<double> errors;
  std::vector<int> labels;
  for (int i = 0; i < 100; ++i) {
    errors.push_back(i);
    labels.push_back(i % 4 == 0);
  }
  const double t = choose_error_threshold(errors, labels);
  const auto report = evaluate(classify_errors(errors, t), labels);
  EXPECT_NEAR(report.accuracy.value(), 0.75, 0.02);
}

TEST(Threshold, MatchesExhaustiveMidpointScan) {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> errors;
    std::vector<int> labels;
    for (int i = 0; i < 120; ++i) {
      const int y = i % 3 == 0;
      labels.push_back(y);
      errors.push_back(std::round((y ? 1.2 : 0.0) + n(rng) * 0.8 * 100) / 100);
    }
    for (ThresholdMetric metric : {ThresholdMetric::accuracy, ThresholdMetric::f1}) {
      std::vector<double> sorted = errors;
      std::sort(sorted.begin(), sorted.end());
      sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
      double best_t = 0, best_score = -1;
      for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        const double mid = (sorted[i] + sorted[i + 1]) / 2;
        const EvalReport r = evaluate(classify_errors(errors, mid), labels);
        const double score = metric == ThresholdMetric::accuracy ? r.accuracy.value() : r.f1;
        if (score > best_score) {
          best_score = score;
          best_t = mid;
        }
      }
      EXPECT_EQ(choose_error_threshold(errors, labels, metric), best_t) << trial;
    }
  }
  EXPECT_EQ(code_of([] { choose_error_threshold(std::vector<double>{1, 2}, std::vector<int>{0, 0}); }),
            Errc::SingleClassInput);
}
