#include "deepproj/error.hpp"
#include "deepproj/projections.hpp"
#include "deepproj/rng.hpp"

#include <cmath>
#include <limits>

namespace deepproj {
namespace {

// Aligned storage keeps the simd loops' reduction order independent of
// where the allocator happens to place the buffers.
using Buffer = Eigen::ArrayXd;

// exp(-x) is subnormal beyond x ~ 708. Subnormal operands make every pass
// over the affinities drastically slower, so such values become zero.
constexpr double kExpCutoff = 700.0;
constexpr double kNegligible = 1e-280;

void check_perplexity(Index n, double perplexity) {
  if (n < 4) throw ParameterError("tsne: need at least 4 points");
  if (!(perplexity > 1.0) || perplexity > static_cast<double>(n - 1))
    throw ParameterError("tsne: perplexity " + std::to_string(perplexity) +
                         " is infeasible for " + std::to_string(n) +
                         " points (need 1 < perplexity <= N-1)");
}

struct RowKernel {
  double beta;
  double entropy;
  bool converged;
};

// Calibrates one row. `dist` holds squared distances with the self entry
// excluded; on return `prob` holds the normalized conditional distribution.
RowKernel calibrate_row(const Buffer& dist, Buffer& prob, Buffer& shifted, double log_perplexity) {
  // Shifting by the nearest distance leaves the normalized kernel unchanged
  // and keeps the sum >= 1.
  shifted = dist - dist.minCoeff();
  double beta = 1.0;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  double entropy = 0.0;
  auto evaluate = [&](double b) {
    // Exponents are clamped so no kernel value is subnormal.
    prob = (shifted * -b).max(-kExpCutoff).exp();
    const double sum = prob.sum();
    const double h = std::log(sum) + b * (shifted * prob).sum() / sum;
    prob /= sum;
    return h;
  };
  bool converged = false;
  for (int step = 0; step < kPerplexitySearchSteps; ++step) {
    entropy = evaluate(beta);
    const double diff = entropy - log_perplexity;
    if (std::abs(diff) <= kEntropyTolerance) {
      converged = true;
      break;
    }
    if (diff > 0) {
      lo = beta;
      beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
    } else {
      hi = beta;
      beta = std::isinf(lo) ? beta * 0.5 : 0.5 * (beta + lo);
    }
  }
  if (!converged) {
    entropy = evaluate(beta);
    converged = std::abs(entropy - log_perplexity) <= kEntropyTolerance;
  }
  // Values pushed to the clamp are negligible; drop them.
  prob = (prob < kNegligible).select(0.0, prob);
  return {beta, entropy, converged};
}

// Calls sink(i, j, p_{j|i}) for all j != i.
template <typename Sink>
PerplexityCalibration calibrate(const Eigen::Ref<const Matrix>& x, double perplexity, Sink&& sink) {
  const Index n = x.rows();
  check_perplexity(n, perplexity);
  const double log_perp = std::log(perplexity);
  PerplexityCalibration cal{Vector(n), Vector(n), {}};
  Buffer dist(n - 1);
  Buffer prob(n - 1);
  Buffer shifted(n - 1);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0, m = 0; j < n; ++j) {
      if (j == i) continue;
      dist(m++) = (x.row(i) - x.row(j)).squaredNorm();
    }
    const auto kernel = calibrate_row(dist, prob, shifted, log_perp);
    cal.beta(i) = kernel.beta;
    cal.entropy(i) = kernel.entropy;
    if (!kernel.converged) cal.unconverged_rows.push_back(i);
    for (Index j = 0, m = 0; j < n; ++j) {
      if (j == i) continue;
      sink(i, j, prob(m++));
    }
  }
  return cal;
}

}  // namespace

double Affinities::total() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return 2.0 * s;
}

Matrix Affinities::dense() const {
  Matrix p = Matrix::Zero(n_, n_);
  for (Index i = 0; i < n_; ++i)
    for (Index j = i + 1; j < n_; ++j) p(i, j) = p(j, i) = at(i, j);
  return p;
}

Matrix tsne_conditionals(const Eigen::Ref<const Matrix>& x, double perplexity,
                         PerplexityCalibration* calibration) {
  Matrix c = Matrix::Zero(x.rows(), x.rows());
  auto cal = calibrate(x, perplexity, [&](Index i, Index j, double p) { c(i, j) = p; });
  if (calibration) *calibration = std::move(cal);
  return c;
}

TsneAffinities tsne_affinities(const Eigen::Ref<const Matrix>& x, double perplexity) {
  const Index n = x.rows();
  TsneAffinities out{Affinities(std::max<Index>(n, 0)), {}};
  out.calibration = calibrate(x, perplexity, [&](Index i, Index j, double p) {
    out.joint.at(i, j) += p;
  });
  const double scale = 1.0 / (2.0 * static_cast<double>(n));
  for (Index i = 0; i + 1 < n; ++i) {
    double* row = out.joint.row_tail(i);
    for (Index m = 0; m < n - i - 1; ++m) {
      row[m] *= scale;
      if (row[m] < std::numeric_limits<double>::min()) row[m] = 0.0;
    }
  }
  return out;
}

namespace {

struct GradientTerms {
  Buffer attract_x, attract_y, repulse_x, repulse_y;
  double z = 0.0;
  double p_log_num = 0.0;  // sum over i<j of p_ij * log(1 + d_ij^2)

  explicit GradientTerms(Index n)
      : attract_x(Buffer::Zero(n)), attract_y(Buffer::Zero(n)),
        repulse_x(Buffer::Zero(n)), repulse_y(Buffer::Zero(n)) {}
};

// One sweep over i<j pairs. The gradient is
//   4 * (exag * attract_i - repulse_i / Z),
// where attract_i = sum_j p_ij q~_ij (y_i - y_j), repulse_i = sum_j q~_ij^2 (y_i - y_j)
// and q~_ij = 1 / (1 + |y_i - y_j|^2), Z = sum_{i != j} q~_ij.
template <bool WithKl>
void sweep(const Affinities& p, const Buffer& yx, const Buffer& yy, GradientTerms& g) {
  const Index n = p.size();
  g.attract_x.setZero();
  g.attract_y.setZero();
  g.repulse_x.setZero();
  g.repulse_y.setZero();
  double z = 0.0;
  double kl_term = 0.0;
  double* __restrict ax = g.attract_x.data();
  double* __restrict ay = g.attract_y.data();
  double* __restrict rx = g.repulse_x.data();
  double* __restrict ry = g.repulse_y.data();
  const double* __restrict px = yx.data();
  const double* __restrict py = yy.data();
  for (Index i = 0; i + 1 < n; ++i) {
    const double xi = px[i];
    const double yi = py[i];
    const double* __restrict prow = p.row_tail(i);
    double axi = 0.0, ayi = 0.0, rxi = 0.0, ryi = 0.0, zi = 0.0, kli = 0.0;
#pragma omp simd reduction(+ : axi, ayi, rxi, ryi, zi, kli)
    for (Index j = i + 1; j < n; ++j) {
      const double pij = prow[j - i - 1];
      const double dx = xi - px[j];
      const double dy = yi - py[j];
      const double d2 = dx * dx + dy * dy;
      const double num = 1.0 / (1.0 + d2);
      const double pn = pij * num;
      const double nn = num * num;
      axi += pn * dx;
      ayi += pn * dy;
      rxi += nn * dx;
      ryi += nn * dy;
      zi += num;
      ax[j] -= pn * dx;
      ay[j] -= pn * dy;
      rx[j] -= nn * dx;
      ry[j] -= nn * dy;
      if constexpr (WithKl) kli += pij * std::log1p(d2);
    }
    ax[i] += axi;
    ay[i] += ayi;
    rx[i] += rxi;
    ry[i] += ryi;
    z += zi;
    kl_term += kli;
  }
  g.z = 2.0 * z;
  g.p_log_num = kl_term;
}

}  // namespace

TsneResult tsne_project(const Eigen::Ref<const Matrix>& x, const TsneConfig& cfg) {
  const Index n = x.rows();
  check_perplexity(n, cfg.perplexity);
  if (cfg.n_iter < 1) throw ParameterError("tsne: n_iter must be >= 1");
  if (cfg.kl_every < 1) throw ParameterError("tsne: kl_every must be >= 1");

  auto aff = tsne_affinities(x, cfg.perplexity);
  const Affinities& p = aff.joint;

  // Constant part of KL(P||Q): sum_{i != j} p log p.
  double p_log_p = 0.0;
  for (Index i = 0; i + 1 < n; ++i) {
    const double* row = p.row_tail(i);
    for (Index m = 0; m < n - i - 1; ++m)
      if (row[m] > 0.0) p_log_p += 2.0 * row[m] * std::log(row[m]);
  }

  Rng rng(cfg.seed);
  Buffer yx(n), yy(n);
  for (Index i = 0; i < n; ++i) {
    yx(i) = rng.normal(0.0, cfg.init_stddev);
    yy(i) = rng.normal(0.0, cfg.init_stddev);
  }
  Buffer ux = Buffer::Zero(n), uy = Buffer::Zero(n);
  Buffer gain_x = Buffer::Ones(n), gain_y = Buffer::Ones(n);
  GradientTerms g(n);

  TsneResult result;
  for (Index it = 0; it < cfg.n_iter; ++it) {
    const bool want_kl = it % cfg.kl_every == 0 || it == cfg.n_iter - 1;
    if (want_kl)
      sweep<true>(p, yx, yy, g);
    else
      sweep<false>(p, yx, yy, g);
    if (!std::isfinite(g.z) || g.z <= 0.0) throw DivergenceError(static_cast<std::size_t>(it), "tsne: normalization became non-finite");

    if (want_kl) {
      // KL = sum p log p + sum p log(1 + d^2) + log Z, with sum p = 1.
      const double kl = p_log_p + 2.0 * g.p_log_num + std::log(g.z);
      result.kl_iterations.push_back(it);
      result.kl_history.push_back(kl);
    }

    const double exag = it < cfg.exaggeration_iters ? cfg.exaggeration : 1.0;
    const double momentum = it < cfg.momentum_switch ? cfg.initial_momentum : cfg.final_momentum;
    const double inv_z = 1.0 / g.z;
    const Buffer grad_x = 4.0 * (exag * g.attract_x - inv_z * g.repulse_x);
    const Buffer grad_y = 4.0 * (exag * g.attract_y - inv_z * g.repulse_y);
    if (!grad_x.allFinite() || !grad_y.allFinite())
      throw DivergenceError(static_cast<std::size_t>(it), "tsne: gradient became non-finite");

    // Delta-bar-delta gains as in the reference implementation.
    auto update_gains = [](Buffer& gain, const Buffer& grad, const Buffer& upd) {
      gain = ((grad > 0.0) != (upd > 0.0)).select(gain + 0.2, gain * 0.8).max(0.01);
    };
    update_gains(gain_x, grad_x, ux);
    update_gains(gain_y, grad_y, uy);
    ux = momentum * ux - cfg.learning_rate * gain_x * grad_x;
    uy = momentum * uy - cfg.learning_rate * gain_y * grad_y;
    yx += ux;
    yy += uy;
    yx -= yx.mean();
    yy -= yy.mean();
  }

  result.embedding.coords.resize(n, 2);
  result.embedding.coords.col(0) = yx.matrix();
  result.embedding.coords.col(1) = yy.matrix();
  result.calibration = std::move(aff.calibration);
  return result;
}

}  // namespace deepproj
