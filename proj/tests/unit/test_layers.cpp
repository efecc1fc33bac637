#include <cmath>
#include <random>

#include "doctest.h"
#include "dynnet/neuralnet/adam.hpp"
#include "dynnet/neuralnet/layers.hpp"

using namespace dynnet;
using namespace dynnet::nn;

namespace {

struct Moments {
  double mean;
  double std;
};

Moments channel_moments(const Tensor<double>& t, std::size_t c) {
  const std::size_t N = t.dim(0), H = t.dim(2), W = t.dim(3);
  double s = 0, sq = 0;
  for (std::size_t n = 0; n < N; ++n)
    for (std::size_t h = 0; h < H; ++h)
      for (std::size_t w = 0; w < W; ++w) s += t.at(n, c, h, w);
  const double m = s / (N * H * W);
  for (std::size_t n = 0; n < N; ++n)
    for (std::size_t h = 0; h < H; ++h)
      for (std::size_t w = 0; w < W; ++w) sq += std::pow(t.at(n, c, h, w) - m, 2);
  return {m, std::sqrt(sq / (N * H * W))};
}

}  // namespace

TEST_CASE("batchnorm2d train mode") {
  BatchNorm2d<double> bn(2);
  SUBCASE("constant input maps to zero") {
    Tensor<double> x(Shape{3, 2, 2, 5}, 4.2);
    const auto y = bn.forward(x, Mode::train);
    for (double v : y.data()) CHECK(v == 0.0);
  }
  SUBCASE("standardizes per channel") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> nd(3.0, 2.0);
    Tensor<double> x(Shape{4, 2, 3, 50});
    for (auto& v : x.data()) v = nd(rng);
    auto y = bn.forward(x, Mode::train);
    for (std::size_t c = 0; c < 2; ++c) {
      const auto m = channel_moments(y, c);
      CHECK(std::abs(m.mean) < 1e-5);
      CHECK(std::abs(m.std - 1.0) < 1e-5);
    }
    bn.gamma().value.fill(2.0);
    bn.beta().value.fill(1.0);
    y = bn.forward(x, Mode::train);
    for (std::size_t c = 0; c < 2; ++c) {
      const auto m = channel_moments(y, c);
      CHECK(std::abs(m.mean - 1.0) < 1e-5);
      CHECK(std::abs(m.std - 2.0) < 1e-4);
    }
  }
  SUBCASE("running statistics move with momentum 0.1") {
    Tensor<double> x(Shape{1, 2, 1, 2}, std::vector<double>{1, 3, 5, 5});
    bn.forward(x, Mode::train);
    CHECK(bn.running_mean()[0] == doctest::Approx(0.2));
    CHECK(bn.running_var()[0] == doctest::Approx(0.9 + 0.1 * 2.0));  // unbiased var 2
    CHECK(bn.running_mean()[1] == doctest::Approx(0.5));
    CHECK(bn.running_var()[1] == doctest::Approx(0.9));
  }
  SUBCASE("needs two values per channel in train mode") {
    Tensor<double> x(Shape{1, 2, 1, 1});
    CHECK_THROWS_AS(bn.forward(x, Mode::train), ConfigError);
    CHECK_NOTHROW(bn.forward(x, Mode::eval));
  }
}

TEST_CASE("batchnorm2d eval mode uses running statistics") {
  BatchNorm2d<double> bn(1);
  Tensor<double> x(Shape{1, 1, 1, 3}, std::vector<double>{1, 2, 3});
  const auto y = bn.forward(x, Mode::eval);  // running mean 0, var 1
  for (std::size_t i = 0; i < 3; ++i) CHECK(y[i] == doctest::Approx(x[i] / std::sqrt(1 + 1e-5)));
}

TEST_CASE("dropout") {
  Tensor<float> x(Shape{4, 8}, 1.5f);
  SUBCASE("identity in eval mode") {
    Dropout<float> d(0.5, 1);
    CHECK(d.forward(x, Mode::eval) == x);
  }
  SUBCASE("p = 0 is the identity in both modes") {
    Dropout<float> d(0.0, 1);
    CHECK(d.forward(x, Mode::train) == x);
    CHECK(d.forward(x, Mode::eval) == x);
  }
  SUBCASE("zero fraction concentrates at p and survivors are rescaled") {
    Dropout<float> d(0.5, 2024);
    Tensor<float> big(Shape{1000000}, 1.0f);
    const auto y = d.forward(big, Mode::train);
    std::size_t zeros = 0;
    for (float v : y.data()) {
      if (v == 0.0f) {
        ++zeros;
      } else {
        CHECK(v == 2.0f);
      }
    }
    const double fraction = zeros / 1e6;
    CHECK(fraction >= 0.498);
    CHECK(fraction <= 0.502);
  }
  SUBCASE("rejects p outside [0, 1)") {
    CHECK_THROWS_AS(Dropout<float>(1.0, 0), ConfigError);
    CHECK_THROWS_AS(Dropout<float>(-0.1, 0), ConfigError);
  }
}

TEST_CASE("activation layer rejects codes outside the registry") {
  CHECK_THROWS_AS(Activation<float>(7), ConfigError);
  CHECK_NOTHROW(Activation<float>(3));
  CHECK_NOTHROW(Activation<float>(9));
}

TEST_CASE("conv2d layer validates groups") {
  Conv2dOptions o;
  o.in_channels = 6;
  o.out_channels = 4;
  o.geometry.groups = 4;
  CHECK_THROWS_AS(Conv2d<float>{o}, BuildError);
}

TEST_CASE("adam") {
  Parameter<double> p{"x", Tensor<double>(Shape{3}, std::vector<double>{1.0, -2.0, 0.5}),
                      Tensor<double>(Shape{3})};
  SUBCASE("first step moves each coordinate by lr against the gradient sign") {
    Adam<double> adam({&p});
    p.grad = Tensor<double>(Shape{3}, std::vector<double>{0.3, -7.0, 1e-3});
    adam.step();
    CHECK(p.value[0] == doctest::Approx(1.0 - 0.001).epsilon(1e-7));
    CHECK(p.value[1] == doctest::Approx(-2.0 + 0.001).epsilon(1e-7));
    // |g| = 1e-3 is still far above epsilon.
    CHECK(p.value[2] == doctest::Approx(0.5 - 0.001).epsilon(1e-6));
    CHECK(adam.steps() == 1);
  }
  SUBCASE("zero gradients leave parameters unchanged") {
    Adam<double> adam({&p});
    const auto before = p.value;
    for (int i = 0; i < 100; ++i) adam.step();
    CHECK(p.value == before);
  }
  SUBCASE("two steps on x^2 follow the update recurrence") {
    Parameter<double> x{"x", Tensor<double>(Shape{1}, 1.0), Tensor<double>(Shape{1})};
    Adam<double> adam({&x});
    // Independent simulation of the bias-corrected recurrence.
    double xr = 1.0, m = 0.0, v = 0.0;
    for (int t = 1; t <= 2; ++t) {
      const double g = 2.0 * xr;
      m = 0.9 * m + 0.1 * g;
      v = 0.999 * v + 0.001 * g * g;
      xr -= 1e-3 * (m / (1 - std::pow(0.9, t))) / (std::sqrt(v / (1 - std::pow(0.999, t))) + 1e-8);
    }
    double prev = x.value[0];
    for (int t = 0; t < 2; ++t) {
      x.grad[0] = 2.0 * x.value[0];
      adam.step();
      CHECK(x.value[0] < prev);
      prev = x.value[0];
    }
    CHECK(x.value[0] == doctest::Approx(xr).epsilon(1e-14));
  }
  SUBCASE("NaN gradient aborts") {
    Adam<double> adam({&p});
    p.grad[1] = std::nan("");
    CHECK_THROWS_AS(adam.step(), NumericError);
  }
}
