#pragma once

// Reference computations kept independent of the library code paths.

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracles {

// Bayes accuracy of N(0.32, 0.09^2) vs N(0.47, 0.11^2) with equal priors,
// from the closed-form decision boundary (roots of the log-density ratio)
// and cross-checked by fine-grid integration of the pointwise density max.
inline constexpr double kOmissionBayesAccuracy = 0.775352544700955;

struct SvmReference {
  std::vector<double> w;
  double b = 0.0;
  double primal = 0.0;
};

inline double hinge_primal(const std::vector<double>& w, double b,
                           const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                           double C) {
  double reg = b * b, loss = 0.0;
  for (double v : w) reg += v * v;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double m = b;
    for (std::size_t k = 0; k < w.size(); ++k) m += w[k] * x[i][k];
    loss += std::max(0.0, 1.0 - y[i] * m);
  }
  return 0.5 * reg + C * loss;
}

// Accelerated projected gradient ascent on the box-constrained dual of the
// bias-augmented hinge SVM, with adaptive restart. Slow but simple.
inline SvmReference projected_gradient_svm(const std::vector<std::vector<double>>& x,
                                           const std::vector<int>& y, double C,
                                           int iterations = 200000) {
  const std::size_t n = x.size(), d = x.front().size();
  std::vector<std::vector<double>> Q(n, std::vector<double>(n));
  double trace = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double k = 1.0;
      for (std::size_t f = 0; f < d; ++f) k += x[i][f] * x[j][f];
      Q[i][j] = y[i] * y[j] * k;
    }
    trace += Q[i][i];
  }
  // Power iteration for the Lipschitz constant.
  std::vector<double> v(n, 1.0), qv(n);
  double L = trace;
  for (int it = 0; it < 500; ++it) {
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      qv[i] = 0.0;
      for (std::size_t j = 0; j < n; ++j) qv[i] += Q[i][j] * v[j];
      norm += qv[i] * qv[i];
    }
    norm = std::sqrt(norm);
    if (norm == 0.0) break;
    L = norm;
    for (std::size_t i = 0; i < n; ++i) v[i] = qv[i] / norm;
  }
  L *= 1.01;

  auto dual = [&](const std::vector<double>& a) {
    double s = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      s += a[i];
      for (std::size_t j = 0; j < n; ++j) quad += a[i] * Q[i][j] * a[j];
    }
    return s - 0.5 * quad;
  };

  std::vector<double> alpha(n, 0.0), prev = alpha, z = alpha;
  double t = 1.0, last = dual(alpha);
  for (int it = 0; it < iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double g = 1.0;
      for (std::size_t j = 0; j < n; ++j) g -= Q[i][j] * z[j];
      prev[i] = alpha[i];
      alpha[i] = std::clamp(z[i] + g / L, 0.0, C);
    }
    const double now = dual(alpha);
    if (now < last) {  // restart momentum
      t = 1.0;
      z = alpha;
    } else {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      for (std::size_t i = 0; i < n; ++i) z[i] = alpha[i] + (t - 1.0) / t_next * (alpha[i] - prev[i]);
      t = t_next;
    }
    last = now;
  }

  SvmReference ref;
  ref.w.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < d; ++f) ref.w[f] += alpha[i] * y[i] * x[i][f];
    ref.b += alpha[i] * y[i];
  }
  ref.primal = hinge_primal(ref.w, ref.b, x, y, C);
  return ref;
}

}  // namespace oracles
