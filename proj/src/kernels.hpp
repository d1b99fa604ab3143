#pragma once

// Raw recursions shared by inference and training. Emissions are passed
// transposed (symbols x states) so that one symbol's column is a
// contiguous row. Matrices are row-major.
//
// Each kernel takes a compile-time state count K (0 = use the runtime
// size); dispatch_states() picks K for the common small cases so the inner
// loops unroll.

#include "tactics/hmm.hpp"

#include <cmath>
#include <span>
#include <utility>
#include <vector>

namespace tactics::detail {

template <typename F>
decltype(auto) dispatch_states(Eigen::Index m, F&& f) {
  switch (m) {
    case 1: return f.template operator()<1>();
    case 2: return f.template operator()<2>();
    case 3: return f.template operator()<3>();
    case 4: return f.template operator()<4>();
    case 5: return f.template operator()<5>();
    case 6: return f.template operator()<6>();
    case 7: return f.template operator()<7>();
    case 8: return f.template operator()<8>();
    default: return f.template operator()<0>();
  }
}

// -sum(log(scales)). Every scale is >= 1 (forward mass never exceeds one),
// so scales are multiplied in blocks and logged once per block.
inline double log_likelihood_from_scales(std::span<const double> scales) {
  double ll = 0.0;
  double block = 1.0;
  for (const double c : scales) {
    if (c > 1e100) {
      ll -= std::log(c);
      continue;
    }
    block *= c;
    if (block > 1e200) {
      ll -= std::log(block);
      block = 1.0;
    }
  }
  return ll - std::log(block);
}

// Fills alpha (N x M) and scales (N). Returns false if the forward mass
// vanishes at some step t; alpha and scales are then cut to t rows.
template <int K = 0>
bool forward_pass(const Vector& prior, const Matrix& transition, const Matrix& emission_t,
                  std::span<const int> obs, Matrix& alpha, std::vector<double>& scales) {
  const auto n = static_cast<Eigen::Index>(obs.size());
  const Eigen::Index m = K > 0 ? K : prior.size();
  alpha.resize(n, m);
  scales.assign(obs.size(), 0.0);
  const double* __restrict a = transition.data();
  const double* __restrict e = emission_t.data();

  for (Eigen::Index t = 0; t < n; ++t) {
    double* __restrict cur = alpha.data() + t * m;
    const double* __restrict b = e + obs[t] * m;
    if (t == 0) {
      for (Eigen::Index j = 0; j < m; ++j) cur[j] = prior(j);
    } else {
      const double* __restrict prev = cur - m;
      for (Eigen::Index j = 0; j < m; ++j) cur[j] = 0.0;
      for (Eigen::Index i = 0; i < m; ++i) {
        const double p = prev[i];
        const double* __restrict ai = a + i * m;
        for (Eigen::Index j = 0; j < m; ++j) cur[j] += p * ai[j];
      }
    }
    double mass = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      cur[j] *= b[j];
      mass += cur[j];
    }
    if (!(mass > 0.0)) {
      alpha.conservativeResize(t, m);
      scales.resize(static_cast<std::size_t>(t));
      return false;
    }
    const double c = 1.0 / mass;
    scales[t] = c;
    for (Eigen::Index j = 0; j < m; ++j) cur[j] *= c;
  }
  return true;
}

// Fills beta (N x M). For each t < N-1, on_weight(t, w) receives
// w[j] = emission(j, obs[t+1]) * beta[t+1][j] * scales[t+1], the factor
// that pairs alpha[t] with the transition into t+1.
template <int K = 0, typename OnWeight>
void backward_pass(const Matrix& transition, const Matrix& emission_t, std::span<const int> obs,
                   std::span<const double> scales, Matrix& beta, OnWeight&& on_weight) {
  const auto n = static_cast<Eigen::Index>(obs.size());
  const Eigen::Index m = K > 0 ? K : transition.rows();
  beta.resize(n, m);
  const double* __restrict a = transition.data();
  const double* __restrict e = emission_t.data();
  double fixed[K > 0 ? K : 1];
  std::vector<double> dynamic(K > 0 ? 0 : static_cast<std::size_t>(m));
  double* __restrict w = K > 0 ? fixed : dynamic.data();

  for (Eigen::Index j = 0; j < m; ++j) beta(n - 1, j) = 1.0;
  for (Eigen::Index t = n - 2; t >= 0; --t) {
    const double* __restrict next = beta.data() + (t + 1) * m;
    const double* __restrict b = e + obs[t + 1] * m;
    const double c = scales[t + 1];
    for (Eigen::Index j = 0; j < m; ++j) w[j] = b[j] * next[j] * c;
    double* __restrict cur = beta.data() + t * m;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double* __restrict ai = a + i * m;
      double acc = 0.0;
      for (Eigen::Index j = 0; j < m; ++j) acc += ai[j] * w[j];
      cur[i] = acc;
    }
    on_weight(t, static_cast<const double*>(w));
  }
}

inline void backward_pass(const Matrix& transition, const Matrix& emission_t, std::span<const int> obs,
                          std::span<const double> scales, Matrix& beta) {
  backward_pass<0>(transition, emission_t, obs, scales, beta, [](Eigen::Index, const double*) {});
}

}  // namespace tactics::detail
