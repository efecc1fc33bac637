#include "dynnet/signal/filter.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "dynnet/core/error.hpp"
#include "rows.hpp"

namespace dynnet::signal {

namespace {

using cplx = std::complex<double>;

std::string band_text(double lo, double hi, double fs) {
  std::ostringstream os;
  os << "band (" << lo << ", " << hi << ") Hz at fs " << fs << " Hz";
  return os.str();
}

// Poles of one section from its denominator.
std::pair<cplx, cplx> section_poles(const Section& s) {
  const cplx disc = std::sqrt(cplx(s.a[1] * s.a[1] - 4.0 * s.a[2], 0.0));
  return {(-s.a[1] + disc) / 2.0, (-s.a[1] - disc) / 2.0};
}

}  // namespace

std::vector<std::complex<double>> IirFilter::poles() const {
  std::vector<cplx> out;
  for (const auto& s : sections) {
    auto [p, q] = section_poles(s);
    out.push_back(p);
    out.push_back(q);
  }
  return out;
}

double IirFilter::max_pole_modulus() const {
  double m = 0.0;
  for (const auto& p : poles()) m = std::max(m, std::abs(p));
  return m;
}

std::complex<double> IirFilter::response(double f) const {
  const cplx z1 = std::polar(1.0, -2.0 * std::numbers::pi * f / fs);  // z^-1
  cplx h = 1.0;
  for (const auto& s : sections) {
    h *= (s.b[0] + z1 * (s.b[1] + z1 * s.b[2])) / (s.a[0] + z1 * (s.a[1] + z1 * s.a[2]));
  }
  return h;
}

IirFilter butter_bandpass(int order, double lo, double hi, double fs) {
  if (order < 1) throw ConfigError("filter order must be >= 1, got " + std::to_string(order));
  if (!(fs > 0.0) || !(lo > 0.0) || !(lo < hi) || !(hi < fs / 2.0)) {
    throw ConfigError("invalid " + band_text(lo, hi, fs) + ": need 0 < lo < hi < fs/2");
  }
  const double pi = std::numbers::pi;
  const double fs2 = 2.0 * fs;
  const double w1 = fs2 * std::tan(pi * lo / fs);
  const double w2 = fs2 * std::tan(pi * hi / fs);
  const double bw = w2 - w1;
  const double w0sq = w1 * w2;

  // Analog low-pass prototype poles on the left half of the unit circle,
  // each split into two band-pass poles, then mapped to z.
  std::vector<cplx> zpoles;
  cplx gain = std::pow(bw, order);
  for (int k = 0; k < order; ++k) {
    const cplx p = std::polar(1.0, pi * (2.0 * k + order + 1) / (2.0 * order));
    const cplx lp = p * bw / 2.0;
    const cplx root = std::sqrt(lp * lp - w0sq);
    for (const cplx s : {lp + root, lp - root}) {
      zpoles.push_back((fs2 + s) / (fs2 - s));
      gain /= (fs2 - s);
    }
  }
  // `order` zeros at s=0 go to z=+1 and contribute fs2 each; the `order`
  // zeros at infinity land on z=-1.
  gain *= std::pow(fs2, order);

  // Pair conjugates; leftover real poles pair with each other in order.
  std::vector<cplx> upper, real;
  for (const cplx& p : zpoles) {
    if (std::abs(p.imag()) <= 1e-12 * std::max(1.0, std::abs(p))) {
      real.push_back(p.real());
    } else if (p.imag() > 0) {
      upper.push_back(p);
    }
  }
  std::sort(real.begin(), real.end(), [](cplx a, cplx b) { return a.real() < b.real(); });

  IirFilter f;
  f.order = order;
  f.lo = lo;
  f.hi = hi;
  f.fs = fs;
  for (const cplx& p : upper) {
    Section s;
    s.b = {1.0, 0.0, -1.0};
    s.a = {1.0, -2.0 * p.real(), std::norm(p)};
    f.sections.push_back(s);
  }
  for (std::size_t i = 0; i + 1 < real.size(); i += 2) {
    Section s;
    s.b = {1.0, 0.0, -1.0};
    s.a = {1.0, -(real[i].real() + real[i + 1].real()), real[i].real() * real[i + 1].real()};
    f.sections.push_back(s);
  }
  if (f.sections.size() != static_cast<std::size_t>(order)) {
    throw NumericError("pole pairing failed for " + band_text(lo, hi, fs));
  }
  for (double& b : f.sections.front().b) b *= gain.real();
  return f;
}

std::vector<double> sosfilt(const IirFilter& filter, std::span<const double> x) {
  std::vector<double> y(x.begin(), x.end());
  for (const auto& s : filter.sections) {
    double z1 = 0.0, z2 = 0.0;
    for (double& v : y) {
      const double in = v;
      const double out = s.b[0] * in + z1;
      z1 = s.b[1] * in - s.a[1] * out + z2;
      z2 = s.b[2] * in - s.a[2] * out;
      v = out;
    }
  }
  return y;
}

std::size_t filtfilt_padlen(const IirFilter& filter) {
  return 3 * (2 * filter.sections.size() + 1);
}

namespace {

// Filters y in place starting from the steady state for a constant input
// equal to y[0].
void run_steady(const IirFilter& filter, std::vector<double>& y) {
  double level = y.empty() ? 0.0 : y.front();
  for (const auto& s : filter.sections) {
    const double g = (s.b[0] + s.b[1] + s.b[2]) / (s.a[0] + s.a[1] + s.a[2]);
    double z2 = (s.b[2] - s.a[2] * g) * level;
    double z1 = (s.b[1] - s.a[1] * g) * level + z2;
    for (double& v : y) {
      const double in = v;
      const double out = s.b[0] * in + z1;
      z1 = s.b[1] * in - s.a[1] * out + z2;
      z2 = s.b[2] * in - s.a[2] * out;
      v = out;
    }
    level *= g;
  }
}

}  // namespace

std::vector<double> filtfilt(const IirFilter& filter, std::span<const double> x) {
  const std::size_t pad = filtfilt_padlen(filter);
  if (x.size() <= pad) {
    throw DataError(DataErrorCode::invalid_argument,
                    "filtfilt needs more than " + std::to_string(pad) + " samples, got " +
                        std::to_string(x.size()));
  }
  const std::size_t n = x.size();
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  run_steady(filter, ext);
  std::reverse(ext.begin(), ext.end());
  run_steady(filter, ext);
  std::reverse(ext.begin(), ext.end());
  return std::vector<double>(ext.begin() + static_cast<std::ptrdiff_t>(pad),
                             ext.begin() + static_cast<std::ptrdiff_t>(pad + n));
}

nn::Tensor<float> filtfilt(const IirFilter& filter, const nn::Tensor<float>& x) {
  return detail::map_rows(x, [&](std::span<const double> row) { return filtfilt(filter, row); });
}

std::vector<std::pair<double, double>> default_bank_edges() {
  std::vector<std::pair<double, double>> edges;
  for (int lo = 4; lo < 40; lo += 4) edges.emplace_back(lo, lo + 4);
  return edges;
}

FilterBank make_filter_bank(const std::vector<std::pair<double, double>>& edges, int order,
                            double fs) {
  if (edges.empty()) throw ConfigError("filter bank needs at least one band");
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (edges[i].first < edges[i - 1].second) {
      throw ConfigError("filter bank bands must be sorted and non-overlapping: " +
                        band_text(edges[i - 1].first, edges[i - 1].second, fs) + " then " +
                        band_text(edges[i].first, edges[i].second, fs));
    }
  }
  FilterBank bank;
  for (const auto& [lo, hi] : edges) bank.filters.push_back(butter_bandpass(order, lo, hi, fs));
  return bank;
}

}  // namespace dynnet::signal
