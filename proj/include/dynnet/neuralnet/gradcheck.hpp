#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dynnet/neuralnet/model.hpp"

namespace dynnet::nn {

struct GradCheckOptions {
  double step = 1e-3;
  Mode mode = Mode::train;
  std::uint64_t seed = 1;
  // Number of input coordinates to probe (seeded sample); 0 probes all.
  std::size_t max_input_checks = 0;
};

struct GradCheckEntry {
  std::string name;
  std::size_t checked = 0;
  double max_abs_error = 0.0;
  double max_rel_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_error = 0.0;
};

/// |analytic - numeric| / max(|analytic|, |numeric|, 1e-6 * reference),
/// where reference is the largest gradient magnitude anywhere in the check;
/// the floor keeps near-zero entries from dividing by round-off.
double relative_error(double analytic, double numeric, double reference);

/// Compares backward() with central differences of the scalar objective
/// sum(r * forward(x)) for a fixed random r. Stochastic layers are reseeded
/// before every evaluation so dropout masks stay fixed.
GradCheckReport gradcheck(Model<double>& model, const Tensor<double>& input,
                          const GradCheckOptions& options = {});

GradCheckReport gradcheck(Layer<double>& layer, const Tensor<double>& input,
                          const GradCheckOptions& options = {});

}  // namespace dynnet::nn
