#pragma once

#include <vector>

#include "dynnet/neuralnet/tensor.hpp"

namespace dynnet::signal::detail {

// Applies f (double span -> double vector) to every row of the last axis.
// All rows must come out the same length.
template <typename F>
nn::Tensor<float> map_rows(const nn::Tensor<float>& x, F&& f) {
  if (x.rank() == 0) throw ConfigError("cannot filter a rank-0 tensor");
  const std::size_t len = x.shape().back();
  const std::size_t rows = len ? x.size() / len : 0;
  std::vector<double> row(len);
  std::vector<float> out;
  std::size_t out_len = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t i = 0; i < len; ++i) row[i] = x[r * len + i];
    const std::vector<double> y = f(std::span<const double>(row));
    if (r == 0) {
      out_len = y.size();
      out.reserve(rows * out_len);
    }
    out.insert(out.end(), y.begin(), y.end());
  }
  nn::Shape shape = x.shape();
  shape.back() = rows ? out_len : len;
  return nn::Tensor<float>(shape, std::move(out));
}

}  // namespace dynnet::signal::detail
