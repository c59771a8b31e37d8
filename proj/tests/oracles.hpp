#pragma once

// Reference implementations written independently of the library: plain
// loops, no Eigen, no shared helpers. Used to cross-check the real code.

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "livqual/image.hpp"
#include "livqual/labels.hpp"
#include "livqual/quality.hpp"

namespace oracles {

struct MeanStd {
  double mean = 0.0;
  double std_dev = 0.0;
};

/// Two-pass population mean and standard deviation of masked pixels.
inline MeanStd two_pass_stats(const livqual::GrayImage &img, const livqual::Mask &mask) {
  double sum = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      if (mask.pixel(x, y)) {
        sum += img.at(x, y);
        ++n;
      }
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      if (mask.pixel(x, y)) ss += (img.at(x, y) - mean) * (img.at(x, y) - mean);
  return {mean, std::sqrt(ss / static_cast<double>(n))};
}

/// Direct -sum p ln p normalized by ln R.
inline double entropy_concentration(const std::vector<double> &e) {
  double total = 0.0;
  for (double v : e) total += v;
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  for (double v : e) {
    if (v <= 0.0) continue;
    const double p = v / total;
    h -= p * std::log(p);
  }
  const double q = 1.0 - h / std::log(static_cast<double>(e.size()));
  return std::fmin(1.0, std::fmax(0.0, q));
}

/// Roots of t^2 - (a + c) t + (ac - b^2) by the textbook quadratic formula.
inline std::pair<double, double> quadratic_eigenvalues(double a, double b, double c) {
  const double tr = a + c;
  const double det = a * c - b * b;
  const double disc = std::sqrt(std::fmax(0.0, tr * tr - 4.0 * det));
  return {(tr + disc) / 2.0, (tr - disc) / 2.0};
}

struct AlphaBeta {
  std::size_t ridge = 0, valley = 0, ridge_above = 0, valley_below = 0;
};

/// Per-pixel counting of ridge pixels brighter and valley pixels darker than
/// the midpoint threshold, classifying pixels through their own projection.
inline AlphaBeta count_alpha_beta(const livqual::GrayImage &img, const livqual::Block &blk,
                                  const livqual::RidgeSignature &sig) {
  struct Px {
    int v;
    bool ridge;
  };
  std::vector<Px> px;
  for (int y = blk.y0; y < blk.y0 + blk.size; ++y)
    for (int x = blk.x0; x < blk.x0 + blk.size; ++x) {
      const double u = -(x - sig.center.x) * std::sin(sig.theta) + (y - sig.center.y) * std::cos(sig.theta);
      const long k = std::lround(std::floor(u + 0.5 + 1e-7)) - sig.first_bin;
      if (k < 0 || k >= static_cast<long>(sig.profile.size())) continue;
      px.push_back({img.at(x, y), sig.profile[k] < sig.profile_mean});
    }
  AlphaBeta r;
  double rs = 0.0, vs = 0.0;
  for (const auto &p : px) {
    if (p.ridge) {
      ++r.ridge;
      rs += p.v;
    } else {
      ++r.valley;
      vs += p.v;
    }
  }
  if (r.ridge == 0 || r.valley == 0) return r;
  const double dt = 0.5 * (rs / static_cast<double>(r.ridge) + vs / static_cast<double>(r.valley));
  for (const auto &p : px) {
    if (p.ridge && p.v > dt) ++r.ridge_above;
    if (!p.ridge && p.v < dt) ++r.valley_below;
  }
  return r;
}

/// Solves A x = b by Gaussian elimination with partial pivoting.
inline std::vector<double> solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

using Rows = std::vector<std::vector<double>>;

struct NaiveLda {
  std::vector<double> mean, std_dev, w;
  std::vector<double> mu_real, mu_fake;
  Rows cov;  // pooled plus regularization
  double b = 0.0;

  double score(const std::vector<double> &raw) const {
    double s = b;
    for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * (raw[j] - mean[j]) / std_dev[j];
    return s;
  }
};

/// Fits z-scoring plus pooled-covariance LDA from scratch on raw subset rows.
inline NaiveLda naive_fit(const Rows &x, const std::vector<livqual::Label> &y,
                          double eps_scale = 1e-6) {
  const std::size_t n = x.size(), d = x[0].size();
  NaiveLda m;
  m.mean.assign(d, 0.0);
  m.std_dev.assign(d, 0.0);
  for (const auto &r : x)
    for (std::size_t j = 0; j < d; ++j) m.mean[j] += r[j];
  for (auto &v : m.mean) v /= static_cast<double>(n);
  for (const auto &r : x)
    for (std::size_t j = 0; j < d; ++j) m.std_dev[j] += (r[j] - m.mean[j]) * (r[j] - m.mean[j]);
  for (std::size_t j = 0; j < d; ++j) {
    m.std_dev[j] = std::sqrt(m.std_dev[j] / static_cast<double>(n));
    if (m.std_dev[j] <= 1e-12 * std::fmax(1.0, std::fabs(m.mean[j]))) m.std_dev[j] = 1.0;
  }
  Rows z(n, std::vector<double>(d));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) z[i][j] = (x[i][j] - m.mean[j]) / m.std_dev[j];

  m.mu_real.assign(d, 0.0);
  m.mu_fake.assign(d, 0.0);
  double nr = 0, nf = 0;
  for (std::size_t i = 0; i < n; ++i) {
    auto &mu = y[i] == livqual::Label::real ? m.mu_real : m.mu_fake;
    (y[i] == livqual::Label::real ? nr : nf) += 1;
    for (std::size_t j = 0; j < d; ++j) mu[j] += z[i][j];
  }
  for (std::size_t j = 0; j < d; ++j) {
    m.mu_real[j] /= nr;
    m.mu_fake[j] /= nf;
  }
  m.cov.assign(d, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    const auto &mu = y[i] == livqual::Label::real ? m.mu_real : m.mu_fake;
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t c = 0; c < d; ++c) m.cov[a][c] += (z[i][a] - mu[a]) * (z[i][c] - mu[c]);
  }
  double trace = 0.0;
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t c = 0; c < d; ++c) m.cov[a][c] /= static_cast<double>(n - 2);
    trace += m.cov[a][a];
  }
  const double eps = trace > 0.0 ? eps_scale * trace / static_cast<double>(d) : eps_scale;
  for (std::size_t a = 0; a < d; ++a) m.cov[a][a] += eps;

  std::vector<double> diff(d);
  for (std::size_t j = 0; j < d; ++j) diff[j] = m.mu_real[j] - m.mu_fake[j];
  m.w = solve(m.cov, diff);
  m.b = 0.0;
  for (std::size_t j = 0; j < d; ++j) m.b -= 0.5 * (m.mu_real[j] + m.mu_fake[j]) * m.w[j];
  return m;
}

/// Leave-one-out labels by refitting from scratch for every held-out sample.
inline std::vector<livqual::Label> naive_loo(const Rows &x, const std::vector<livqual::Label> &y) {
  std::vector<livqual::Label> out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    Rows tx;
    std::vector<livqual::Label> ty;
    for (std::size_t k = 0; k < x.size(); ++k)
      if (k != i) {
        tx.push_back(x[k]);
        ty.push_back(y[k]);
      }
    const NaiveLda m = naive_fit(tx, ty);
    out.push_back(m.score(x[i]) > 0.0 ? livqual::Label::real : livqual::Label::fake);
  }
  return out;
}

} // namespace oracles
