// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ibpm/autodiff.hpp"

namespace ibpm::testing {

inline double sigmoid_ref(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Scalar-loop GRU for one row, written independently of the tape ops.
inline std::vector<double> gru_reference(const nn::ParamStore& p, const std::string& prefix,
                                         const std::vector<double>& x, const std::vector<double>& h) {
  const std::size_t d = h.size();
  auto affine = [&](const std::string& gate, const std::vector<double>& hin, std::size_t j) {
    const Tensor& W = p.get(prefix + ".W" + gate);
    const Tensor& U = p.get(prefix + ".U" + gate);
    double s = p.get(prefix + ".b" + gate)[j];
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * W(i, j);
    for (std::size_t i = 0; i < d; ++i) s += hin[i] * U(i, j);
    return s;
  };
  std::vector<double> z(d), r(d), rh(d), out(d);
  for (std::size_t j = 0; j < d; ++j) {
    z[j] = sigmoid_ref(affine("z", h, j));
    r[j] = sigmoid_ref(affine("r", h, j));
  }
  for (std::size_t j = 0; j < d; ++j) rh[j] = r[j] * h[j];
  for (std::size_t j = 0; j < d; ++j) {
    const double cand = std::tanh(affine("h", rh, j));
    out[j] = (1 - z[j]) * h[j] + z[j] * cand;
  }
  return out;
}

inline std::vector<double> row(const Tensor& t, std::size_t r) {
  std::vector<double> out(t.cols());
  for (std::size_t j = 0; j < t.cols(); ++j) out[j] = t(r, j);
  return out;
}

}  // namespace ibpm::testing
