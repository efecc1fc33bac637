#include "dynnet/neuralnet/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>

namespace dynnet::nn {

double relative_error(double analytic, double numeric, double reference) {
  const double denom =
      std::max({std::abs(analytic), std::abs(numeric), 1e-6 * reference, 1e-300});
  return std::abs(analytic - numeric) / denom;
}

namespace {

struct Probe {
  std::function<Tensor<double>(const Tensor<double>&)> forward;
  std::function<Tensor<double>(const Tensor<double>&)> backward;
  std::function<void()> zero_grad;
  std::function<std::vector<Parameter<double>*>()> parameters;
};

double objective(const Tensor<double>& out, const Tensor<double>& weights) {
  double s = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) s += out[i] * weights[i];
  return s;
}

GradCheckEntry compare(const std::string& name, std::span<double> values,
                       std::span<const double> analytic,
                       const std::vector<std::size_t>& coords,
                       const std::function<double()>& evaluate, double h,
                       double reference) {
  GradCheckEntry e{name, coords.size(), 0.0, 0.0};
  for (std::size_t i : coords) {
    const double saved = values[i];
    values[i] = saved + h;
    const double up = evaluate();
    values[i] = saved - h;
    const double down = evaluate();
    values[i] = saved;
    const double numeric = (up - down) / (2.0 * h);
    e.max_abs_error = std::max(e.max_abs_error, std::abs(numeric - analytic[i]));
    e.max_rel_error =
        std::max(e.max_rel_error, relative_error(analytic[i], numeric, reference));
  }
  return e;
}

std::vector<std::size_t> all_coords(std::size_t n) {
  std::vector<std::size_t> c(n);
  std::iota(c.begin(), c.end(), std::size_t{0});
  return c;
}

GradCheckReport run(const Probe& probe, const Tensor<double>& input,
                    const GradCheckOptions& opt, const std::function<void()>& reseed) {
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);

  reseed();
  Tensor<double> x = input;
  probe.zero_grad();
  const Tensor<double> out = probe.forward(x);
  Tensor<double> weights(out.shape());
  for (auto& w : weights.data()) w = unif(rng);
  const Tensor<double> grad_input = probe.backward(weights);

  auto evaluate = [&] {
    reseed();
    return objective(probe.forward(x), weights);
  };

  // One scale for the whole check: a parameter whose true gradient is
  // structurally zero (e.g. a shift cancelled by a later batch norm) must
  // not be judged against its own round-off.
  double reference = 0.0;
  for (double a : grad_input.data()) reference = std::max(reference, std::abs(a));
  for (auto* p : probe.parameters()) {
    for (double a : p->grad.data()) reference = std::max(reference, std::abs(a));
  }

  GradCheckReport report;
  for (auto* p : probe.parameters()) {
    const std::vector<double> analytic(p->grad.data().begin(), p->grad.data().end());
    report.entries.push_back(compare(p->name, p->value.data(), analytic,
                                     all_coords(p->value.size()), evaluate, opt.step,
                                     reference));
  }

  std::vector<std::size_t> coords = all_coords(x.size());
  if (opt.max_input_checks > 0 && opt.max_input_checks < coords.size()) {
    std::shuffle(coords.begin(), coords.end(), rng);
    coords.resize(opt.max_input_checks);
  }
  report.entries.push_back(
      compare("input", x.data(), grad_input.data(), coords, evaluate, opt.step, reference));

  for (const auto& e : report.entries) {
    report.max_rel_error = std::max(report.max_rel_error, e.max_rel_error);
  }
  return report;
}

}  // namespace

GradCheckReport gradcheck(Model<double>& model, const Tensor<double>& input,
                          const GradCheckOptions& options) {
  const Mode saved_mode = model.mode();
  const std::uint64_t saved_seed = model.seed();
  model.set_mode(options.mode);
  Probe probe{[&](const Tensor<double>& x) { return model.forward(x); },
              [&](const Tensor<double>& g) { return model.backward(g); },
              [&] { model.zero_grad(); }, [&] { return model.parameters(); }};
  // Running statistics drift with every train-mode forward; they do not
  // enter the train-mode output, but restore them afterwards anyway.
  const auto state = model.state();
  auto report = run(probe, input, options, [&] { model.reseed(options.seed); });
  model.load_state(state);
  model.set_mode(saved_mode);
  model.reseed(saved_seed);
  // Layer names are only unique per layer; prefix them with their position.
  std::size_t entry = 0;
  for (std::size_t i = 0; i < model.size(); ++i) {
    for (std::size_t j = 0; j < model.layer(i).parameters().size(); ++j) {
      report.entries[entry].name =
          "layer" + std::to_string(i) + "." + report.entries[entry].name;
      ++entry;
    }
  }
  return report;
}

GradCheckReport gradcheck(Layer<double>& layer, const Tensor<double>& input,
                          const GradCheckOptions& options) {
  Probe probe{[&](const Tensor<double>& x) { return layer.forward(x, options.mode); },
              [&](const Tensor<double>& g) { return layer.backward(g); },
              [&] {
                for (auto* p : layer.parameters()) p->grad.fill(0.0);
              },
              [&] { return layer.parameters(); }};
  return run(probe, input, options, [&] { layer.reseed(options.seed); });
}

}  // namespace dynnet::nn
