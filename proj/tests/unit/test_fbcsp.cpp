#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "doctest.h"
#include "dynnet/core/error.hpp"
#include "dynnet/core/log.hpp"
#include "dynnet/dataio/synth.hpp"
#include "dynnet/fbcsp/fbcsp.hpp"

using namespace dynnet;
using namespace dynnet::fbcsp;

namespace {

Eigen::MatrixXd random_psd(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXd a(n, n + 3);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = nd(rng);
  Eigen::MatrixXd c = a * a.transpose();
  return c / c.trace();
}

double percent_correct(const std::vector<int>& pred, const std::vector<int>& truth) {
  std::size_t hit = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == truth[i];
  return 100.0 * hit / pred.size();
}

data::TrialSet by_session(const data::TrialSet& set, data::Session s) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < set.n_trials(); ++i)
    if (set.sessions[i] == s) idx.push_back(i);
  return data::subset(set, idx);
}

struct SinkGuard {
  std::vector<std::string> messages;
  WarningSink previous;
  SinkGuard() {
    previous = set_warning_sink([this](const std::string& m) { messages.push_back(m); });
  }
  ~SinkGuard() { set_warning_sink(previous); }
};

}  // namespace

TEST_CASE("trial_covariance") {
  std::mt19937_64 rng(1);
  std::normal_distribution<float> nd;
  Eigen::MatrixXd x(2, 5000);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = nd(rng);
  const auto c = trial_covariance(x);
  CHECK(c(0, 0) == doctest::Approx(0.5).epsilon(0.1));
  CHECK(std::abs(c(0, 1)) < 0.05);
  CHECK(c.trace() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK((c - c.transpose()).norm() == 0.0);

  Eigen::MatrixXd single = Eigen::MatrixXd::Zero(3, 10);
  for (int t = 0; t < 10; ++t) single(1, t) = t * t;
  const auto s = trial_covariance(single);
  CHECK(s(1, 1) == doctest::Approx(1.0));
  CHECK(s.cwiseAbs().sum() == doctest::Approx(1.0));

  CHECK_THROWS_AS(trial_covariance(Eigen::MatrixXd::Zero(3, 10)), DataError);
  const float constant[6] = {2, 2, 2, 5, 5, 5};
  CHECK_THROWS_AS(trial_covariance(constant, 2, 3), DataError);
}

TEST_CASE("csp_fit hand-computed 2x2 case") {
  Eigen::MatrixXd c1(2, 2), c2(2, 2);
  c1 << 0.8, 0, 0, 0.2;
  c2 << 0.2, 0, 0, 0.8;
  const auto csp = csp_fit(c1, c2, 1);
  CHECK(std::abs(csp.eigenvalues(0) - 0.8) < 1e-10);
  CHECK(std::abs(csp.eigenvalues(1) - 0.2) < 1e-10);
  CHECK((csp.W - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("csp_fit symmetric classes") {
  const Eigen::MatrixXd half = Eigen::MatrixXd::Identity(4, 4) / 2;
  const auto csp = csp_fit(half, half, 2);
  for (Eigen::Index i = 0; i < 4; ++i) CHECK(csp.eigenvalues(i) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("csp_fit against a generalized eigensolver on random pairs") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng() % 9);
    const std::size_t m = 1 + rng() % (n / 2);
    const Eigen::MatrixXd c1 = random_psd(rng, n), c2 = random_psd(rng, n);
    const auto csp = csp_fit(c1, c2, m);
    const auto mm = static_cast<Eigen::Index>(2 * m);

    const Eigen::MatrixXd white = csp.W * (c1 + c2) * csp.W.transpose();
    CHECK((white - Eigen::MatrixXd::Identity(mm, mm)).cwiseAbs().maxCoeff() < 1e-8);
    const Eigen::VectorXd l1 = (csp.W * c1 * csp.W.transpose()).diagonal();
    const Eigen::VectorXd l2 = (csp.W * c2 * csp.W.transpose()).diagonal();
    CHECK(((l1 + l2).array() - 1.0).abs().maxCoeff() < 1e-8);
    CHECK((l1 - csp.eigenvalues).cwiseAbs().maxCoeff() < 1e-8);

    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ref(c1, c1 + c2);
    const Eigen::VectorXd& lam = ref.eigenvalues();  // ascending
    for (std::size_t j = 0; j < m; ++j) {
      CHECK(std::abs(csp.eigenvalues(j) - lam(n - 1 - j)) < 1e-8);
      CHECK(std::abs(csp.eigenvalues(mm - 1 - j) - lam(j)) < 1e-8);
    }
    for (Eigen::Index i = 0; i < mm; ++i) {
      CHECK(csp.eigenvalues(i) >= -1e-12);
      CHECK(csp.eigenvalues(i) <= 1 + 1e-12);
    }
  }
}

TEST_CASE("csp_fit ridges a singular composite") {
  SinkGuard sink;
  Eigen::MatrixXd c1 = Eigen::MatrixXd::Zero(3, 3), c2 = c1;
  c1(0, 0) = 0.6;
  c2(1, 1) = 0.4;
  const auto csp = csp_fit(c1, c2, 1);
  CHECK(sink.messages.size() == 1);
  CHECK(csp.W.allFinite());
}

TEST_CASE("csp features") {
  Eigen::VectorXd v(2);
  v << 0.8, 0.2;
  const auto f = log_variance_ratio(v);
  CHECK(f(0) == doctest::Approx(-0.2231).epsilon(1e-4));
  CHECK(f(1) == doctest::Approx(-1.6094).epsilon(1e-4));
  const auto eq = log_variance_ratio(Eigen::VectorXd::Constant(4, 3.0));
  for (Eigen::Index i = 0; i < 4; ++i) CHECK(eq(i) == doctest::Approx(std::log(0.25)));

  SinkGuard sink;
  Eigen::VectorXd z(2);
  z << 1.0, 0.0;
  const auto clamped = log_variance_ratio(z);
  CHECK(std::isfinite(clamped(1)));
  CHECK(sink.messages.size() == 1);

  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  std::vector<CspModel> models;
  std::vector<Eigen::MatrixXd> bands;
  for (int b = 0; b < 9; ++b) {
    models.push_back(csp_fit(random_psd(rng, 6), random_psd(rng, 6), 2));
    Eigen::MatrixXd x(6, 100);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = nd(rng);
    bands.push_back(x);
  }
  const auto feat = csp_features(bands, models);
  CHECK(feat.size() == 36);
  for (auto& x : bands) x *= 37.5;
  CHECK((csp_features(bands, models) - feat).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("mutual_information") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> nd;
  std::vector<int> labels(2000);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 2);
  std::vector<double> noise(2000), separated(2000), constant(2000, 3.0);
  for (std::size_t i = 0; i < 2000; ++i) {
    noise[i] = nd(rng);
    separated[i] = (labels[i] ? 10.0 : -10.0) + nd(rng);
  }
  CHECK(mutual_information(noise, labels) <= 0.05);
  CHECK(mutual_information(separated, labels) >= 0.9);
  CHECK(mutual_information(separated, labels) <= 1.0);
  CHECK(mutual_information(constant, labels) == 0.0);

  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 4 + rng() % 60;
    std::vector<double> f(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = i < 2 ? 0 : (i < 4 ? 1 : static_cast<int>(rng() % 2));
      f[i] = nd(rng) + (rng() % 3 == 0 ? 2.0 * y[i] : 0.0);
    }
    double p1 = 0;
    for (int v : y) p1 += v;
    p1 /= n;
    const double hy = -(p1 * std::log2(p1) + (1 - p1) * std::log2(1 - p1));
    const double mi = mutual_information(f, y);
    CHECK(mi >= 0.0);
    CHECK(mi <= hy + 1e-15);
  }
  CHECK_THROWS_AS(mutual_information(std::vector<double>{1, 2, 3}, std::vector<int>{0, 1, 1}), DataError);
}

TEST_CASE("mibif_select") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> nd;
  const std::size_t n = 200, m = 2, bands = 3;
  Eigen::MatrixXd x(n, bands * 2 * m);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<int>(i % 2);
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = nd(rng);
    // Band 1 carries the class; its outer rows most strongly.
    x(i, 4) += 6.0 * y[i];
    x(i, 7) -= 6.0 * y[i];
    x(i, 5) += 4.0 * y[i];
    x(i, 6) -= 4.0 * y[i];
  }
  CHECK(mibif_select(x, y, 4, m) == std::vector<std::size_t>{4, 5, 6, 7});
  CHECK(mibif_select(x, y, 1, m) == std::vector<std::size_t>{4, 7});
  std::vector<std::size_t> all(12);
  std::iota(all.begin(), all.end(), std::size_t{0});
  CHECK(mibif_select(x, y, 12, m) == all);

  CHECK(csp_complement(0, 2) == 3);
  CHECK(csp_complement(5, 2) == 6);
  const Eigen::MatrixXd flat = Eigen::MatrixXd::Constant(10, 8, 1.0);
  std::vector<int> yy{0, 1, 0, 1, 0, 1, 0, 1, 0, 1};
  CHECK(mibif_select(flat, yy, 1, 2) == std::vector<std::size_t>{0, 3});
  CHECK_THROWS_AS(mibif_select(flat, yy, 9, 2), ConfigError);
}

TEST_CASE("lda") {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> nd;
  const Eigen::Vector2d mu(1.5, -0.5);
  Eigen::MatrixXd x(400, 2);
  std::vector<int> y(400);
  for (int i = 0; i < 400; ++i) {
    y[i] = i % 2;
    const Eigen::Vector2d noise(nd(rng), nd(rng));
    x.row(i) = (y[i] ? mu : Eigen::Vector2d(-mu)) + 0.3 * noise;
  }
  // Exact symmetry: mirror the first half onto the second.
  for (int i = 0; i < 200; ++i) x.row(200 + i) = -x.row(i), y[200 + i] = 1 - y[i];
  const auto lda = lda_fit(x, y);
  CHECK(lda_posterior(lda, Eigen::Vector2d::Zero()) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(lda_posterior(lda, mu) > 0.9);
  CHECK(lda_posterior(lda, -mu) < 0.1);

  Eigen::MatrixXd same(300, 2);
  std::vector<int> yy(300);
  for (int i = 0; i < 300; ++i) {
    yy[i] = i < 100 ? 1 : 0;
    same.row(i) << nd(rng), nd(rng);
  }
  for (int i = 0; i < 100; ++i) same.row(100 + i) = same.row(i), same.row(200 + i) = same.row(i);
  const auto flat = lda_fit(same, yy);
  CHECK(lda_posterior(flat, Eigen::Vector2d(0.3, -2.0)) == doctest::Approx(1.0 / 3).epsilon(1e-9));

  const Eigen::MatrixXd constant = Eigen::MatrixXd::Ones(6, 2);
  CHECK_THROWS_AS(lda_fit(constant, std::vector<int>{0, 1, 0, 1, 0, 1}), NumericError);
  CHECK_THROWS_AS(lda_fit(x.topRows(3), std::vector<int>{0, 1, 1}), DataError);
}

TEST_CASE("fbcsp on synthetic two-class data") {
  data::SynthConfig c;
  c.trials_per_class = 60;
  c.snr = 0.7;
  const auto set = data::synth_mi(c);
  const auto train = by_session(set, data::Session::train);
  const auto test = by_session(set, data::Session::test);

  const auto model = ovr_fit(train, FbcspConfig{}, 2);
  CHECK(model.heads.size() == 2);
  CHECK(percent_correct(ovr_predict(model, test), test.labels) >= 95.0);

  const auto head = fbcsp_fit(train, 1, FbcspConfig{});
  const auto bank = signal::make_filter_bank(FbcspConfig{}.bands, 3, train.fs);
  const auto filtered = filter_trials(test, bank);
  std::vector<int> pred;
  for (const auto& t : filtered) pred.push_back(head.posterior(t) > 0.5 ? 1 : 0);
  CHECK(percent_correct(pred, test.labels) >= 95.0);

  SUBCASE("whitening holds in every fitted band") {
    const auto trials = filter_trials(train, bank);
    for (std::size_t b = 0; b < bank.size(); ++b) {
      Eigen::MatrixXd c1 = Eigen::MatrixXd::Zero(8, 8), c2 = c1;
      std::size_t n1 = 0;
      for (std::size_t t = 0; t < trials.size(); ++t) {
        const auto cov = trial_covariance(trials[t][b]);
        if (train.labels[t] == 1) c1 += cov, ++n1;
        else c2 += cov;
      }
      c1 /= n1;
      c2 /= trials.size() - n1;
      const auto& W = head.csp[b].W;
      CHECK((W * (c1 + c2) * W.transpose() - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
  SUBCASE("shuffled labels give chance") {
    data::TrialSet shuffled = train;
    std::mt19937_64 rng(5);
    std::shuffle(shuffled.labels.begin(), shuffled.labels.end(), rng);
    const auto null_model = ovr_fit(shuffled, FbcspConfig{}, 2);
    const double acc = percent_correct(ovr_predict(null_model, test), test.labels);
    CHECK(acc >= 40.0);
    CHECK(acc <= 60.0);
  }
  SUBCASE("global scaling leaves predictions unchanged") {
    data::TrialSet scaled = test;
    for (auto& v : scaled.data.data()) v *= 8.0f;
    CHECK(ovr_predict(model, scaled) == ovr_predict(model, test));
  }
}

TEST_CASE("fbcsp one-vs-rest on four classes") {
  data::SynthConfig c;
  c.class_bands = {{9, 11}, {17, 19}, {25, 27}, {33, 35}};
  c.class_channels = {0, 1, 2, 3};
  c.trials_per_class = 30;
  c.snr = 0.7;
  const auto set = data::synth_mi(c);
  const auto train = by_session(set, data::Session::train);
  const auto test = by_session(set, data::Session::test);
  const auto model = ovr_fit(train, FbcspConfig{});
  CHECK(model.heads.size() == 4);
  CHECK(percent_correct(ovr_predict(model, test), test.labels) >= 90.0);

  const auto it = std::find(train.labels.begin(), train.labels.end(), 2);
  CHECK(ovr_predict(model, train, static_cast<std::size_t>(it - train.labels.begin())) == 2);

  SUBCASE("fitting is deterministic and serializes losslessly") {
    const std::string bytes = serialize(model);
    CHECK(serialize(ovr_fit(train, FbcspConfig{})) == bytes);
    const auto back = deserialize_fbcsp(bytes);
    CHECK(serialize(back) == bytes);
    CHECK(ovr_predict(back, test) == ovr_predict(model, test));
    CHECK_THROWS_AS(deserialize_fbcsp(bytes.substr(0, bytes.size() - 3)), DataError);
    std::string magic = bytes;
    magic[0] = 'X';
    CHECK_THROWS_AS(deserialize_fbcsp(magic), DataError);
  }
  SUBCASE("missing class") {
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < train.n_trials(); ++i)
      if (train.labels[i] != 3) keep.push_back(i);
    CHECK_THROWS_AS(ovr_fit(data::subset(train, keep), FbcspConfig{}), DataError);
  }
}
