// Property acceptance suite. One line per criterion; exits nonzero on any
// failure. Needs no external data.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dynnet/builder/builder.hpp"
#include "dynnet/core/log.hpp"
#include "dynnet/dataio/synth.hpp"
#include "dynnet/evaluation/experiment.hpp"
#include "dynnet/evaluation/splits.hpp"
#include "dynnet/evaluation/stats.hpp"
#include "dynnet/fbcsp/csp.hpp"
#include "dynnet/neuralnet/gradcheck.hpp"
#include "dynnet/signal/ema.hpp"
#include "dynnet/signal/filter.hpp"
#include "dynnet/signal/resample.hpp"
#include "verdict.hpp"

using namespace dynnet;
using acceptance::fmt;
using acceptance::Outcome;

namespace {

constexpr double kPi = std::numbers::pi;

nn::Tensor<double> uniform_tensor(nn::Shape shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  nn::Tensor<double> t(std::move(shape));
  for (auto& v : t.data()) v = u(rng);
  return t;
}

void randomize(nn::Layer<double>& layer, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto* p : layer.parameters())
    for (auto& v : p->value.data()) v = u(rng);
}

// ---------------------------------------------------------------- gradients

Outcome gradient_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  std::string worst_name;
  std::set<nn::LayerKind> kinds;
  auto check = [&](const std::string& name, nn::Layer<double>& layer, const nn::Tensor<double>& x,
                   nn::Mode mode = nn::Mode::train) {
    nn::GradCheckOptions o;
    o.mode = mode;
    const double e = nn::gradcheck(layer, x, o).max_rel_error;
    kinds.insert(layer.kind());
    if (e >= worst) {
      worst = e;
      worst_name = name;
    }
  };

  nn::Dense<double> fc(6, 4, true);
  randomize(fc, 1);
  check("dense", fc, uniform_tensor({5, 6}, 2));
  nn::Dense<double> fc_nobias(6, 3, false);
  randomize(fc_nobias, 3);
  check("dense without bias", fc_nobias, uniform_tensor({4, 6}, 4));

  nn::Conv2dOptions plain;
  plain.in_channels = 1;
  plain.out_channels = 3;
  plain.kernel = {1, 5};
  plain.geometry.padding = {0, 2};
  nn::Conv2d<double> conv(plain);
  randomize(conv, 5);
  check("temporal conv", conv, uniform_tensor({2, 1, 3, 12}, 6));

  nn::Conv2dOptions depth;
  depth.in_channels = 4;
  depth.out_channels = 8;
  depth.kernel = {3, 1};
  depth.geometry.groups = 4;
  depth.bias = true;
  nn::Conv2d<double> dconv(depth);
  randomize(dconv, 7);
  check("depthwise conv", dconv, uniform_tensor({2, 4, 3, 7}, 8));

  nn::Conv2dOptions strided;
  strided.in_channels = 2;
  strided.out_channels = 4;
  strided.kernel = {2, 3};
  strided.geometry = {{2, 2}, {1, 2}, 2};
  nn::Conv2d<double> sconv(strided);
  randomize(sconv, 9);
  check("strided grouped conv", sconv, uniform_tensor({2, 2, 5, 8}, 10));

  nn::BatchNorm2d<double> bn(3);
  randomize(bn, 11);
  const auto bx = uniform_tensor({2, 3, 2, 5}, 12);
  check("batchnorm train", bn, bx);
  check("batchnorm eval", bn, bx, nn::Mode::eval);

  const auto x4 = uniform_tensor({2, 3, 4, 8}, 13);
  nn::Activation<double> elu(static_cast<int>(nn::ActivationCode::elu));
  check("elu", elu, x4);
  nn::Activation<double> lsm(static_cast<int>(nn::ActivationCode::log_softmax));
  check("log_softmax", lsm, uniform_tensor({3, 5}, 14));
  nn::Pool2d<double> avg(nn::PoolCode::average, {1, 4});
  check("average pool", avg, x4);
  nn::Pool2d<double> mx(nn::PoolCode::max, {2, 3});
  check("max pool", mx, x4);
  nn::Dropout<double> drop(0.5, 15);
  check("dropout", drop, x4);
  nn::Flatten<double> flat;
  check("flatten", flat, x4);

  // Whole network at the committed input size.
  auto built = builder::build_model<double>(builder::load_model_spec(DYNNET_SPEC_DIR "/eegnet.spec"), 5);
  nn::Tensor<double> x(nn::Shape{1, 1, 22, 512});
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (auto& v : x.data()) v = nd(rng);
  nn::GradCheckOptions full;
  full.step = 1e-5;
  const double model_err = nn::gradcheck(built.model, x, full).max_rel_error;
  if (model_err >= worst) {
    worst = model_err;
    worst_name = "full model";
  }

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool all_kinds = kinds.size() == 7;
  const bool pass = worst < 1e-4 && secs < 120.0 && all_kinds;
  return {pass, "max rel error " + fmt("%.3g", worst) + " (" + worst_name + "), full model " +
                    fmt("%.3g", model_err) + ", layer kinds " + std::to_string(kinds.size()) + "/7, " +
                    fmt("%.1f s", secs) + " < 120 s"};
}

// ----------------------------------------------------------------- builder

Outcome builder_golden() {
  const auto spec = builder::load_model_spec(DYNNET_SPEC_DIR "/eegnet.spec");
  if (!builder::validate_spec(spec).empty()) return {false, "committed spec does not validate"};

  // Shape and parameter arithmetic straight from the spec lists.
  std::size_t ch = 1, h = spec.h, w = spec.w, params = 0;
  for (std::size_t i = 0; i < spec.layers_cnn; ++i) {
    const auto k = spec.kernel_list[i];
    const auto s = spec.stride(i);
    const auto p = spec.padding_list[i];
    const auto f = spec.filters_list[i];
    params += f.out * (f.in / spec.groups_list[i]) * k.h * k.w + (spec.bias_list[i] ? f.out : 0);
    if (spec.cnn_normalization_list[i]) params += 2 * f.out;
    h = (h + 2 * p.h - k.h) / s.h + 1;
    w = (w + 2 * p.w - k.w) / s.w + 1;
    if (spec.pooling_list[i].code != -1) {
      h /= spec.pooling_list[i].kernel.h;
      w /= spec.pooling_list[i].kernel.w;
    }
    ch = f.out;
  }
  const std::size_t flatten = ch * h * w;
  std::size_t in = flatten;
  for (std::size_t j = 0; j < spec.layers_ff; ++j) {
    params += in * spec.neurons_list[j] + (spec.bias_list[spec.layers_cnn + j] ? spec.neurons_list[j] : 0);
    in = spec.neurons_list[j];
  }

  const auto built = builder::build_model<float>(spec, 1);

  using K = nn::LayerKind;
  const std::vector<K> expected{K::conv2d,     K::batchnorm2d, K::conv2d,  K::batchnorm2d, K::activation, K::pool2d,
                                K::dropout,    K::conv2d,      K::conv2d,  K::batchnorm2d, K::activation, K::pool2d,
                                K::dropout,    K::flatten,     K::dense,   K::activation};
  std::vector<K> kinds;
  for (std::size_t i = 0; i < built.model.size(); ++i) kinds.push_back(built.model.layer(i).kind());

  const bool pass = built.report.flatten_dim == 240 && flatten == 240 && built.report.parameter_count == 1972 &&
                    params == 1972 && built.model.parameter_count() == 1972 && kinds == expected;
  return {pass, "flatten " + std::to_string(built.report.flatten_dim) + " (oracle " + std::to_string(flatten) +
                    "), params " + std::to_string(built.report.parameter_count) + " (oracle " +
                    std::to_string(params) + "), block order " + (kinds == expected ? "matches" : "differs")};
}

// --------------------------------------------------------------------- CSP

Eigen::MatrixXd random_covariance(std::size_t c, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::MatrixXd a(c, c + 5);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = nd(rng);
  Eigen::MatrixXd cov = a * a.transpose();
  return cov / cov.trace();
}

Outcome csp_suite() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> channels(2, 16);
  double whitening = 0.0, pair_sum = 0.0, eig = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t c = channels(rng);
    const auto c1 = random_covariance(c, rng);
    const auto c2 = random_covariance(c, rng);
    const auto model = fbcsp::csp_fit(c1, c2, c / 2);
    const auto& W = model.W;
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(W.rows(), W.rows());
    whitening = std::max(whitening, (W * (c1 + c2) * W.transpose() - I).cwiseAbs().maxCoeff());
    const Eigen::VectorXd l1 = (W * c1 * W.transpose()).diagonal();
    const Eigen::VectorXd l2 = (W * c2 * W.transpose()).diagonal();
    pair_sum = std::max(pair_sum, (l1 + l2 - Eigen::VectorXd::Ones(l1.size())).cwiseAbs().maxCoeff());
    eig = std::max(eig, (l1 - model.eigenvalues).cwiseAbs().maxCoeff());
  }

  Eigen::MatrixXd a = Eigen::Vector2d(0.8, 0.2).asDiagonal();
  Eigen::MatrixXd b = Eigen::Vector2d(0.2, 0.8).asDiagonal();
  const auto hand = fbcsp::csp_fit(a, b, 1);
  const double lambda_err = std::max(std::abs(hand.eigenvalues(0) - 0.8), std::abs(hand.eigenvalues(1) - 0.2));
  // C1 + C2 = I, so the filters are the coordinate axes themselves.
  const double axis_err = (hand.W.cwiseAbs() - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff();

  const bool pass = whitening < 1e-8 && pair_sum < 1e-8 && eig < 1e-8 && lambda_err < 1e-10 && axis_err < 1e-10;
  return {pass, "whitening " + fmt("%.2g", whitening) + ", pair sums " + fmt("%.2g", pair_sum) +
                    ", eigenvalues " + fmt("%.2g", eig) + " (< 1e-8 over 100 pairs); 2x2 lambda " +
                    fmt("%.2g", lambda_err) + ", axes " + fmt("%.2g", axis_err) + " (< 1e-10)"};
}

// --------------------------------------------------------------------- DSP

// Evaluated from the section coefficients on the unit circle.
double gain_db(const signal::IirFilter& f, double hz) {
  const std::complex<double> z1 = std::polar(1.0, -2.0 * kPi * hz / f.fs);
  std::complex<double> h = 1.0;
  for (const auto& s : f.sections) {
    h *= (s.b[0] + s.b[1] * z1 + s.b[2] * z1 * z1) / (s.a[0] + s.a[1] * z1 + s.a[2] * z1 * z1);
  }
  return 20.0 * std::log10(std::abs(h));
}

// Roots of z^2 + a1 z + a2 for every section.
double pole_radius(const signal::IirFilter& f) {
  double r = 0.0;
  for (const auto& s : f.sections) {
    const std::complex<double> disc = std::sqrt(std::complex<double>(s.a[1] * s.a[1] - 4.0 * s.a[2]));
    r = std::max({r, std::abs((-s.a[1] + disc) / 2.0), std::abs((-s.a[1] - disc) / 2.0)});
  }
  return r;
}

std::vector<double> sine(double hz, double fs, std::size_t n, double phase = 0.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(2.0 * kPi * hz * i / fs + phase);
  return x;
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const Eigen::Map<const Eigen::ArrayXd> x(a.data(), a.size()), y(b.data(), b.size());
  const Eigen::ArrayXd dx = x - x.mean(), dy = y - y.mean();
  return (dx * dy).sum() / std::sqrt((dx * dx).sum() * (dy * dy).sum());
}

double rms(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s / x.size());
}

Outcome dsp_suite() {
  std::vector<std::string> failures;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  };

  // Stability over the bank, the worked designs and random designs.
  std::vector<signal::IirFilter> designs;
  for (const auto& f : signal::make_filter_bank(signal::default_bank_edges(), 3, 250.0).filters) designs.push_back(f);
  const auto wide = signal::butter_bandpass(3, 4, 40, 250);
  const auto mu = signal::butter_bandpass(3, 8, 12, 250);
  designs.push_back(wide);
  designs.push_back(mu);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double fs = 100.0 + 900.0 * u(rng);
    const double lo = (0.01 + 0.4 * u(rng)) * fs / 2;
    const double hi = lo + (0.02 + 0.5 * u(rng)) * (0.99 * fs / 2 - lo);
    designs.push_back(signal::butter_bandpass(1 + static_cast<int>(u(rng) * 8), lo, hi, fs));
  }
  double radius = 0.0;
  for (const auto& f : designs) radius = std::max(radius, pole_radius(f));
  expect(radius < 1.0 - 1e-9, "pole radius " + fmt("%.12f", radius));

  const double dc = gain_db(wide, 0.0), centre = gain_db(wide, std::sqrt(4.0 * 40.0));
  expect(dc < -60.0, "4-40 Hz gain at 0 Hz " + fmt("%.1f dB", dc));
  expect(centre > -1.0, "4-40 Hz gain at 12.65 Hz " + fmt("%.3f dB", centre));
  const double s4 = gain_db(mu, 4.0), s24 = gain_db(mu, 24.0);
  expect(s4 < -15.0 && s24 < -15.0, "8-12 Hz stopband " + fmt("%.1f", s4) + "/" + fmt("%.1f dB", s24));

  // Zero phase and amplitude for a 10 Hz tone through 4-40 Hz.
  const std::size_t n = 2500;
  const auto tone = sine(10.0, 250.0, n);
  const auto y = signal::filtfilt(wide, tone);
  int best_lag = 0;
  double best = -1e300;
  // The tone repeats every 25 samples, so search within half a period.
  for (int lag = -12; lag <= 12; ++lag) {
    double acc = 0.0;
    for (std::size_t i = 250; i + 250 < n; ++i) acc += tone[i] * y[i + lag];
    if (acc > best) {
      best = acc;
      best_lag = lag;
    }
  }
  expect(best_lag == 0, "peak lag " + std::to_string(best_lag));
  const double amp = rms(std::span(y).subspan(250, n - 500)) / rms(std::span(tone).subspan(250, n - 500));
  expect(std::abs(amp - 1.0) < 0.02, "10 Hz amplitude ratio " + fmt("%.4f", amp));
  double loudest = 0.0;
  for (double hz = 5.0; hz <= 38.0; hz += 1.0) {
    const auto t = sine(hz, 250.0, n);
    const auto f = signal::filtfilt(wide, t);
    loudest = std::max(loudest, rms(std::span(f).subspan(250, n - 500)) / rms(std::span(t).subspan(250, n - 500)));
  }
  expect(loudest <= 1.01, "passband amplitude gain " + fmt("%.4f", loudest));

  const std::vector<double> flat(1000, 3.0);
  double dc_out = 0.0;
  for (double v : signal::filtfilt(wide, flat)) dc_out = std::max(dc_out, std::abs(v));
  expect(dc_out < 1e-3 * 3.0, "dc residue " + fmt("%.2g", dc_out));
  const std::vector<double> zeros(500, 0.0);
  expect(signal::filtfilt(wide, zeros) == zeros, "zero input not zero");
  try {
    signal::filtfilt(wide, std::vector<double>(signal::filtfilt_padlen(wide), 1.0));
    failures.push_back("short input accepted");
  } catch (const DataError&) {
  }

  // Resampling.
  const std::vector<double> thousand(1000, 0.5);
  expect(signal::resample(thousand, 250.0, 128.0).size() == 512, "1000 samples did not give 512");
  const auto noise_in = sine(3.3, 250.0, 777, 0.4);
  expect(signal::resample(noise_in, 250.0, 250.0) == noise_in, "equal rates changed the signal");
  double worst_corr = 1.0;
  for (double hz = 1.0; hz < 40.0; hz += 2.0) {
    const auto r = signal::resample(sine(hz, 250.0, 1000, 0.3), 250.0, 128.0);
    worst_corr = std::min(worst_corr, correlation(r, sine(hz, 128.0, r.size(), 0.3)));
  }
  expect(worst_corr > 0.99, "resample correlation " + fmt("%.4f", worst_corr));

  // EMA standardization.
  std::normal_distribution<double> nd(2.0, 3.0);
  std::vector<double> white(100000);
  for (auto& v : white) v = nd(rng);
  const auto z = signal::ema_standardize(white, 0.999);
  const double zstd = eval::sample_std(z);
  expect(zstd >= 0.8 && zstd <= 1.2, "ema std " + fmt("%.3f", zstd));
  const auto prefix = signal::ema_standardize(std::span(white).first(5000), 0.999);
  expect(std::equal(prefix.begin(), prefix.end(), z.begin()), "ema not causal");
  bool constant_zero = true;
  for (double v : signal::ema_standardize(std::vector<double>(300, -4.0), 0.999)) constant_zero = constant_zero && v == 0.0;
  expect(constant_zero, "constant input not zero");

  std::string detail = failures.empty() ? "stability " + fmt("%.6f", radius) + ", dc " + fmt("%.0f dB", dc) +
                                              ", 12.65 Hz " + fmt("%.3f dB", centre) + ", lag 0, amplitude " +
                                              fmt("%.4f", amp) + ", resample corr " + fmt("%.4f", worst_corr) +
                                              ", ema std " + fmt("%.3f", zstd)
                                        : "";
  for (const auto& f : failures) detail += (detail.empty() ? "" : "; ") + f;
  return {failures.empty(), detail};
}

// ------------------------------------------------------------ split leakage

data::TrialSet random_set(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> subjects(9, 12), per(1, 6), label(0, 3);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  const int ns = subjects(rng);
  data::TrialSet s;
  s.fs = 100.0;
  std::vector<float> payload;
  for (int subj = 1; subj <= ns; ++subj) {
    for (auto session : {data::Session::train, data::Session::test}) {
      const int count = per(rng);
      for (int t = 0; t < count; ++t) {
        s.labels.push_back(label(rng));
        s.subjects.push_back(subj);
        s.sessions.push_back(session);
        for (int k = 0; k < 2 * 4; ++k) payload.push_back(u(rng));
      }
    }
  }
  // Interleave the order so the splits cannot rely on contiguity.
  std::vector<std::size_t> order(s.labels.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  s.data = nn::Tensor<float>(nn::Shape{s.labels.size(), 2, 4}, payload);
  return data::subset(s, order);
}

std::size_t trial_hash(const data::TrialSet& s, std::size_t i) {
  const std::string_view bytes(reinterpret_cast<const char*>(s.trial(i)),
                               s.n_channels() * s.n_samples() * sizeof(float));
  return std::hash<std::string_view>{}(bytes);
}

Outcome split_leakage() {
  std::mt19937_64 rng(99);
  std::vector<std::string> problems;
  auto subjects_of = [](const data::TrialSet& s, const std::vector<std::size_t>& idx) {
    std::set<int> out;
    for (auto i : idx) out.insert(s.subjects[i]);
    return out;
  };
  auto disjoint = [](const auto& a, const auto& b) {
    for (const auto& v : a)
      if (b.count(v)) return false;
    return true;
  };
  auto as_set = [](const std::vector<std::size_t>& v) { return std::set<std::size_t>(v.begin(), v.end()); };

  for (int round = 0; round < 100 && problems.empty(); ++round) {
    const auto set = random_set(rng);
    const std::string tag = "set " + std::to_string(round) + ": ";
    std::set<std::size_t> train_session;
    for (std::size_t i = 0; i < set.n_trials(); ++i)
      if (set.sessions[i] == data::Session::train) train_session.insert(i);

    eval::SplitOptions opt;
    opt.seed = rng();
    for (auto scheme : {eval::Scheme::single, eval::Scheme::mixed, eval::Scheme::loso, eval::Scheme::lawhern}) {
      for (bool session_only : {false, true}) {
        opt.test_session_only = session_only;
        const auto plan = eval::make_splits(scheme, set, opt);
        const std::string where = tag + eval::to_string(scheme) + ": ";
        if (!eval::check_plan(plan, set).empty()) problems.push_back(where + "check_plan complained");
        if (plan.folds.size() != subject_ids(set).size()) problems.push_back(where + "fold count");
        for (const auto& f : plan.folds) {
          const auto tr = as_set(f.train), va = as_set(f.validation), te = as_set(f.test);
          if (!disjoint(tr, te) || !disjoint(va, te) || !disjoint(tr, va)) problems.push_back(where + "index overlap");
          if (te.empty()) problems.push_back(where + "empty test fold");
          if (subjects_of(set, f.test) != std::set<int>{f.test_subject}) problems.push_back(where + "test subject");
          if (scheme == eval::Scheme::loso || scheme == eval::Scheme::lawhern) {
            const auto st = subjects_of(set, f.train), sv = subjects_of(set, f.validation),
                       ss = subjects_of(set, f.test);
            if (!disjoint(st, ss) || !disjoint(sv, ss) || !disjoint(st, sv)) problems.push_back(where + "subject leak");
            std::set<std::size_t> hashes;
            for (auto i : f.train) hashes.insert(trial_hash(set, i));
            for (auto i : f.validation) hashes.insert(trial_hash(set, i));
            for (auto i : f.test)
              if (hashes.count(trial_hash(set, i))) problems.push_back(where + "trial hash collision");
            if (scheme == eval::Scheme::lawhern && (st.size() != 5 || sv.size() != 3))
              problems.push_back(where + "lawhern subject counts");
          }
          if (scheme == eval::Scheme::mixed && tr != train_session) problems.push_back(where + "mixed train fold");
          if (scheme == eval::Scheme::single) {
            for (auto i : f.train)
              if (set.subjects[i] != f.test_subject || set.sessions[i] != data::Session::train)
                problems.push_back(where + "single train fold");
          }
        }
      }
    }
  }
  if (!problems.empty()) return {false, problems.front()};
  return {true, "100 randomized sets x 4 schemes x both loso test modes, no overlap or subject leak"};
}

// ------------------------------------------------------- synthetic end to end

data::SynthConfig four_class() {
  data::SynthConfig c;
  c.class_bands = {{9, 11}, {17, 19}, {25, 27}, {33, 35}};
  c.class_channels = {0, 1, 2, 3};
  return c;
}

double score(const eval::Method& method, const data::SynthConfig& config) {
  const auto set = data::synth_mi(config);
  eval::ExperimentOptions opt;
  opt.seed = 3;
  const auto column = eval::run_experiment(method, set, eval::make_splits(eval::Scheme::single, set), opt);
  return column.average();
}

eval::Method eegnet_for(const data::SynthConfig& c) {
  eval::EegnetMethod m;
  const std::size_t samples = signal::resampled_length(c.samples, c.fs, 128.0);
  m.spec = builder::eegnet_spec(c.channels, samples, c.class_bands.size());
  m.train.epochs = 60;
  m.preprocess = {std::nullopt, std::nullopt, 3, std::nullopt, 128.0};
  return m;
}

eval::Method fbcsp_for() {
  eval::FbcspMethod m;
  m.preprocess.window.reset();
  return m;
}

Outcome synthetic_end_to_end() {
  const auto t0 = std::chrono::steady_clock::now();
  const data::SynthConfig two;
  const auto four = four_class();
  data::SynthConfig noise;
  noise.snr = 0.0;
  noise.trials_per_class = 100;

  const double f2 = score(fbcsp_for(), two), e2 = score(eegnet_for(two), two);
  const double f4 = score(fbcsp_for(), four), e4 = score(eegnet_for(four), four);
  const double fn = score(fbcsp_for(), noise), en = score(eegnet_for(noise), noise);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const bool pass = f2 >= 95.0 && e2 >= 90.0 && f4 >= 85.0 && e4 >= 85.0 && std::abs(fn - 50.0) <= 10.0 &&
                    std::abs(en - 50.0) <= 10.0 && secs < 600.0;
  return {pass, "2-class FBCSP " + fmt("%.2f", f2) + " EEGNet " + fmt("%.2f", e2) + "; 4-class FBCSP " +
                    fmt("%.2f", f4) + " EEGNet " + fmt("%.2f", e4) + "; noise FBCSP " + fmt("%.2f", fn) +
                    " EEGNet " + fmt("%.2f", en) + "; " + fmt("%.0f s", secs) + " < 600 s"};
}

// -------------------------------------------------------------- statistics

// Two-sided p by composite Simpson integration of the Student t density.
double t_density_p(double t, double df) {
  const double c = std::exp(std::lgamma((df + 1) / 2) - std::lgamma(df / 2)) / std::sqrt(df * kPi);
  auto f = [&](double x) { return c * std::pow(1.0 + x * x / df, -(df + 1) / 2); };
  const double a = std::abs(t);
  const int n = 20000;
  const double h = a / n;
  double s = f(0) + f(a);
  for (int i = 1; i < n; ++i) s += f(i * h) * (i % 2 ? 4 : 2);
  return 1.0 - 2.0 * s * h / 3.0;
}

Outcome statistics() {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> len(3, 12);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> shift(-1.5, 1.5);
  double worst_p = 0.0, worst_t = 0.0;
  for (int i = 0; i < 50; ++i) {
    const int n = len(rng);
    const double mu = shift(rng);
    std::vector<double> a(n), b(n), d(n);
    for (int k = 0; k < n; ++k) {
      b[k] = 50.0 + 10.0 * nd(rng);
      a[k] = b[k] + mu + nd(rng);
      d[k] = a[k] - b[k];
    }
    double m = 0.0, ss = 0.0;
    for (double v : d) m += v / n;
    for (double v : d) ss += (v - m) * (v - m);
    const double t = m / (std::sqrt(ss / (n - 1)) / std::sqrt(static_cast<double>(n)));
    const auto r = eval::paired_t_test(a, b);
    worst_t = std::max(worst_t, std::abs(r.t - t) / std::max(1.0, std::abs(t)));
    worst_p = std::max(worst_p, std::abs(r.p - t_density_p(t, n - 1)));
  }
  const std::vector<double> x{1, 2, 3}, zero{0, 0, 0};
  const auto ex = eval::paired_t_test(x, zero);
  const auto same = eval::paired_t_test(x, x);
  const bool pass = worst_p < 1e-6 && worst_t < 1e-9 && std::abs(ex.p - 0.0742) <= 1e-4 &&
                    std::abs(ex.t - 2.0 * std::sqrt(3.0)) < 1e-12 && ex.df == 2.0 && same.t == 0.0 && same.p == 1.0;
  return {pass, "oracle p error " + fmt("%.2g", worst_p) + " over 50 inputs; [1,2,3] t " + fmt("%.4f", ex.t) +
                    " p " + fmt("%.6f", ex.p)};
}

}  // namespace

int main() {
  // The committed spec's surplus bias entry warns on every build.
  set_warning_sink([](const std::string&) {});
  acceptance::Verdicts v;
  v.run("gradient suite", gradient_suite);
  v.run("builder golden", builder_golden);
  v.run("CSP suite", csp_suite);
  v.run("DSP suite", dsp_suite);
  v.run("split leakage", split_leakage);
  v.run("synthetic end-to-end", synthetic_end_to_end);
  v.run("statistics", statistics);
  return v.exit_code();
}
