// Copyright 2026 The sparrow-forge Authors
// SPDX-License-Identifier: Apache-2.0

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "sforge/diversity.hpp"
#include "sforge/error.hpp"
#include "sforge/parallel.hpp"
#include "sforge/rng.hpp"

namespace sforge {

namespace {

constexpr double kFloor = 1e-12;
constexpr int kMaxBisection = 50;

double sum_in_order(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s;
}

}  // namespace

void TsneConfig::validate(std::size_t n) const {
  if (n < 4) throw ConfigError(fmt::format("t-SNE needs at least 4 points, got {}", n));
  if (n > kMaxPoints) {
    throw ConfigError(fmt::format("t-SNE is exact and capped at {} points, got {}", kMaxPoints, n));
  }
  if (!(perplexity > 0) || !std::isfinite(perplexity)) {
    throw ConfigError("t-SNE perplexity must be positive");
  }
  if (!(perplexity < static_cast<double>(n - 1) / 3.0)) {
    throw ConfigError(fmt::format("t-SNE perplexity {} is infeasible for {} points (needs < {})",
                                  perplexity, n, static_cast<double>(n - 1) / 3.0));
  }
  if (iterations < 1) throw ConfigError("t-SNE iterations must be positive");
  if (!(early_exaggeration > 0)) throw ConfigError("t-SNE early exaggeration must be positive");
  if (exaggeration_iterations < 0) throw ConfigError("t-SNE exaggeration iterations must be >= 0");
  if (!(learning_rate > 0)) throw ConfigError("t-SNE learning rate must be positive");
  if (initial_momentum < 0 || initial_momentum >= 1 || final_momentum < 0 || final_momentum >= 1) {
    throw ConfigError("t-SNE momentum must lie in [0, 1)");
  }
  if (kl_every < 1) throw ConfigError("t-SNE kl_every must be positive");
}

double conditional_entropy(std::span<const double> sqdist_row, double beta) {
  if (sqdist_row.empty()) return 0.0;
  const double dmin = *std::min_element(sqdist_row.begin(), sqdist_row.end());
  double sum = 0, weighted = 0;
  for (double d : sqdist_row) {
    const double s = d - dmin;
    const double w = std::exp(-beta * s);
    sum += w;
    weighted += s * w;
  }
  return std::log(sum) + beta * weighted / sum;
}

Affinities joint_probabilities(const DenseMatrix& x, double perplexity, unsigned jobs) {
  const std::size_t n = x.rows;
  if (n < 2) throw ArgumentError("joint_probabilities: need at least 2 points");
  Affinities a;
  a.n = n;
  a.p.assign(n * n, 0.0);
  a.betas.assign(n, 1.0);
  const double target = std::log(perplexity);
  const double tol = 1e-5 * (1.0 + std::abs(target));
  std::vector<char> missed(n, 0);

  parallel_for(n, jobs, [&](std::size_t i) {
    std::vector<double> d;
    d.reserve(n - 1);
    const double* xi = x.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double* xj = x.row(j);
      double s = 0;
      for (std::size_t k = 0; k < x.cols; ++k) {
        const double t = xi[k] - xj[k];
        s += t * t;
      }
      d.push_back(s);
    }
    const double dmin = *std::min_element(d.begin(), d.end());
    for (double& v : d) v -= dmin;

    double beta = 1.0, lo = 0.0, hi = std::numeric_limits<double>::infinity();
    bool ok = false;
    for (int step = 0; step < kMaxBisection; ++step) {
      const double h = conditional_entropy(d, beta);
      if (std::abs(h - target) <= tol) {
        ok = true;
        break;
      }
      if (h > target) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
      } else {
        hi = beta;
        beta = 0.5 * (beta + lo);
      }
    }
    if (!ok && std::abs(conditional_entropy(d, beta) - target) <= tol) ok = true;
    a.betas[i] = beta;
    missed[i] = ok ? 0 : 1;

    double sum = 0;
    for (double v : d) sum += std::exp(-beta * v);
    double* row = a.p.data() + i * n;
    std::size_t k = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      row[j] = std::exp(-beta * d[k++]) / sum;
    }
  });

  const double denom = 2.0 * static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (missed[i]) a.uncalibrated.push_back(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = (a.p[i * n + j] + a.p[j * n + i]) / denom;
      a.p[i * n + j] = v;
      a.p[j * n + i] = v;
    }
  }
  return a;
}

double kl_divergence(std::span<const double> p, std::span<const double> y, std::size_t n) {
  if (p.size() != n * n || y.size() != n * 2) throw ArgumentError("kl_divergence: shape mismatch");
  std::vector<double> z(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double dx = y[2 * i] - y[2 * j], dy = y[2 * i + 1] - y[2 * j + 1];
      z[i] += 1.0 / (1.0 + dx * dx + dy * dy);
    }
  }
  const double zsum = sum_in_order(z);
  std::vector<double> part(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double pij = p[i * n + j];
      if (j == i || pij <= 0) continue;
      const double dx = y[2 * i] - y[2 * j], dy = y[2 * i + 1] - y[2 * j + 1];
      const double q = 1.0 / (1.0 + dx * dx + dy * dy) / zsum;
      part[i] += pij * std::log(std::max(pij, kFloor) / std::max(q, kFloor));
    }
  }
  return sum_in_order(part);
}

std::vector<double> kl_gradient(std::span<const double> p, std::span<const double> y,
                                std::size_t n, double exaggeration, unsigned jobs) {
  if (p.size() != n * n || y.size() != n * 2) throw ArgumentError("kl_gradient: shape mismatch");
  // grad_i = 4 * (e * sum_j p_ij w_ij (y_i - y_j) - sum_j w_ij^2 (y_i - y_j) / Z),
  // with w_ij = 1 / (1 + |y_i - y_j|^2). Both sums need only row i, so a single
  // pass suffices and Z is applied afterwards.
  std::vector<double> attract(2 * n, 0.0), repel(2 * n, 0.0), z(n, 0.0);
  parallel_for(n, jobs, [&](std::size_t i) {
    double ax = 0, ay = 0, rx = 0, ry = 0, zi = 0;
    const double yix = y[2 * i], yiy = y[2 * i + 1];
    const double* prow = p.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double dx = yix - y[2 * j], dy = yiy - y[2 * j + 1];
      const double w = 1.0 / (1.0 + dx * dx + dy * dy);
      zi += w;
      const double pw = prow[j] * w;
      ax += pw * dx;
      ay += pw * dy;
      const double ww = w * w;
      rx += ww * dx;
      ry += ww * dy;
    }
    attract[2 * i] = ax;
    attract[2 * i + 1] = ay;
    repel[2 * i] = rx;
    repel[2 * i + 1] = ry;
    z[i] = zi;
  });
  const double zsum = sum_in_order(z);
  std::vector<double> g(2 * n);
  for (std::size_t k = 0; k < 2 * n; ++k) {
    g[k] = 4.0 * (exaggeration * attract[k] - repel[k] / zsum);
  }
  return g;
}

Projection2D tsne(const DenseMatrix& x_in, std::vector<std::string> labels,
                  const TsneConfig& config) {
  const std::size_t n = x_in.rows;
  config.validate(n);
  if (labels.size() != n) {
    throw ArgumentError(fmt::format("tsne: {} labels for {} points", labels.size(), n));
  }
  const DenseMatrix x = config.pca_dims > 0 ? pca_reduce(x_in, config.pca_dims) : x_in;
  const Affinities aff = joint_probabilities(x, config.perplexity, config.jobs);

  Projection2D out;
  out.labels = std::move(labels);
  out.uncalibrated = aff.uncalibrated;

  Rng rng(config.seed);
  std::vector<double> y(2 * n);
  for (double& v : y) v = rng.normal() * 1e-4;
  std::vector<double> update(2 * n, 0.0), gains(2 * n, 1.0);

  out.kl_trace.emplace_back(0, kl_divergence(aff.p, y, n));
  for (int it = 0; it < config.iterations; ++it) {
    const double exag = it < config.exaggeration_iterations ? config.early_exaggeration : 1.0;
    const double mom =
        it < config.momentum_switch_iteration ? config.initial_momentum : config.final_momentum;
    const std::vector<double> grad = kl_gradient(aff.p, y, n, exag, config.jobs);
    for (std::size_t k = 0; k < 2 * n; ++k) {
      if (!std::isfinite(grad[k])) {
        throw NumericalError(it, fmt::format("t-SNE gradient is not finite at iteration {}", it));
      }
      const bool same_sign = (grad[k] > 0) == (update[k] > 0);
      gains[k] = std::max(0.01, same_sign ? gains[k] * 0.8 : gains[k] + 0.2);
      update[k] = mom * update[k] - config.learning_rate * gains[k] * grad[k];
      y[k] += update[k];
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
      mx += y[2 * i];
      my += y[2 * i + 1];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[2 * i] -= mx;
      y[2 * i + 1] -= my;
    }
    if ((it + 1) % config.kl_every == 0 || it + 1 == config.iterations) {
      const double kl = kl_divergence(aff.p, y, n);
      if (!std::isfinite(kl)) {
        throw NumericalError(it, fmt::format("t-SNE objective is not finite at iteration {}", it));
      }
      out.kl_trace.emplace_back(it + 1, kl);
    }
  }
  out.points.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.points[i] = {y[2 * i], y[2 * i + 1]};
  return out;
}

Projection2D tsne(const EmbeddingMatrix& matrix, const TsneConfig& config) {
  return tsne(matrix.vectors, matrix.labels, config);
}

}  // namespace sforge
