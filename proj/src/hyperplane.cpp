#include "augclip/hyperplane.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "json.hpp"

#include "augclip/error.hpp"
#include "augclip/kernels.hpp"
#include "augclip/linalg.hpp"

namespace augclip {

namespace {

constexpr double kMinWeightNorm = 1e-9;

void check_data(const LabeledPoints& data) {
  const std::size_t n = data.points.size();
  if (data.labels.size() != n || data.weights.size() != n) {
    throw Error(ErrorCode::InvalidArgument, "points, labels and weights must align");
  }
  bool has_pos = false;
  bool has_neg = false;
  for (std::size_t k = 0; k < n; ++k) {
    if (data.labels[k] == 1) {
      has_pos = true;
    } else if (data.labels[k] == -1) {
      has_neg = true;
    } else {
      throw Error(ErrorCode::InvalidArgument, "labels must be +1 or -1");
    }
    if (!(data.weights[k] >= 0.0) || !std::isfinite(data.weights[k])) {
      throw Error(ErrorCode::InvalidArgument, "sample weights must be finite and nonnegative");
    }
    if (data.points[k].dim() != data.points.front().dim()) {
      throw Error(ErrorCode::DimensionMismatch, "attribute point " + std::to_string(k));
    }
  }
  if (!has_pos || !has_neg) {
    throw Error(ErrorCode::EmptySet, "both classes need at least one point");
  }
  bool all_same = true;
  for (std::size_t k = 1; k < n && all_same; ++k) {
    const auto diff = subtract(data.points[k].values(), data.points[0].values());
    all_same = norm(diff) <= kZeroNormThreshold;
  }
  if (all_same) throw Error(ErrorCode::DegenerateData, "all attribute points are identical");
}

void require_nonzero_w(const Hyperplane& h) {
  if (!(norm(h.w) > kMinWeightNorm)) {
    throw Error(ErrorCode::DegenerateData,
                "fitted normal vector vanished; classes are not separable in any direction");
  }
}

// w = sum_k coef_k x_k
Vector combine(const LabeledPoints& data, std::span<const double> coef) {
  Vector w(data.points.front().dim(), 0.0);
  for (std::size_t k = 0; k < coef.size(); ++k) {
    if (coef[k] != 0.0) axpy(coef[k], data.points[k].values(), w);
  }
  return w;
}

double softplus(double z) {
  // log(1 + e^z) without overflow.
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Midpoint of the set of b minimizing sum_k omega_k max(0, 1 - y_k (w.x_k + b))
// for fixed w. The loss is convex piecewise linear with kinks at
// b = y_k - w.x_k; its slope starts at -(target weight) and each kink adds
// omega_k.
double hinge_offset(const LabeledPoints& data, std::span<const double> w) {
  const std::size_t n = data.points.size();
  std::vector<std::pair<double, double>> kinks(n);
  double slope = 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    kinks[k] = {data.labels[k] - dot(w, data.points[k].values()), data.weights[k]};
    if (data.labels[k] == 1) slope -= data.weights[k];
    total += data.weights[k];
  }
  std::sort(kinks.begin(), kinks.end());
  const double flat = 1e-12 * std::max(total, 1.0);
  for (std::size_t k = 0; k < n; ++k) {
    slope += kinks[k].second;
    if (slope < -flat) continue;
    if (slope > flat) return kinks[k].first;
    // Flat piece: the optimum extends to the next kink that makes it rise.
    std::size_t m = k + 1;
    while (m < n && slope + kinks[m].second <= flat) slope += kinks[m++].second;
    return m < n ? 0.5 * (kinks[k].first + kinks[m].first) : kinks[k].first;
  }
  return kinks.back().first;
}

}  // namespace

std::string_view to_string(Fitter fitter) noexcept {
  switch (fitter) {
    case Fitter::svm: return "svm";
    case Fitter::logistic: return "logistic";
    case Fitter::lda: return "lda";
  }
  return "svm";
}

std::optional<Fitter> parse_fitter(std::string_view s) noexcept {
  if (s == "svm") return Fitter::svm;
  if (s == "logistic") return Fitter::logistic;
  if (s == "lda") return Fitter::lda;
  return std::nullopt;
}

void FitConfig::validate() const {
  if (!(c > 0.0) || max_iters <= 0 || !(tol > 0.0) || !(ridge > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "fit configuration values must be positive");
  }
}

double Hyperplane::decision(std::span<const double> x) const { return dot(w, x) + b; }

LabeledPoints LabeledPoints::from_sets(const AttributeSet& source, const AttributeSet& target,
                                       const WeightVector& weights) {
  require_embedded(source);
  require_embedded(target);
  if (weights.source.size() != source.size() || weights.target.size() != target.size()) {
    throw Error(ErrorCode::InvalidArgument, "weight vector does not match attribute sets");
  }
  LabeledPoints data;
  for (std::size_t i = 0; i < source.size(); ++i) {
    data.points.push_back(source.embeddings[i]);
    data.labels.push_back(-1);
    data.weights.push_back(weights.source[i]);
  }
  for (std::size_t j = 0; j < target.size(); ++j) {
    data.points.push_back(target.embeddings[j]);
    data.labels.push_back(1);
    data.weights.push_back(weights.target[j]);
  }
  return data;
}

double svm_primal_objective(const LabeledPoints& data, std::span<const double> w, double b,
                            double c) {
  long double loss = 0.0L;
  for (std::size_t k = 0; k < data.points.size(); ++k) {
    const double margin = data.labels[k] * (dot(w, data.points[k].values()) + b);
    loss += data.weights[k] * std::max(0.0, 1.0 - margin);
  }
  const double wn = norm(w);
  return 0.5 * wn * wn + c * static_cast<double>(loss);
}

double logistic_objective(const LabeledPoints& data, std::span<const double> w, double b,
                          double c) {
  long double loss = 0.0L;
  for (std::size_t k = 0; k < data.points.size(); ++k) {
    const double margin = data.labels[k] * (dot(w, data.points[k].values()) + b);
    loss += data.weights[k] * softplus(-margin);
  }
  const double wn = norm(w);
  return 0.5 * (1.0 / c) * wn * wn + static_cast<double>(loss);
}

// Sequential minimal optimization on the dual
//   min 0.5 a^T Q a - sum(a)   s.t.  y^T a = 0,  0 <= a_k <= c * weight_k
// with Q_ij = y_i y_j x_i.x_j. Working pairs are chosen by maximal KKT
// violation with second-order gain, scanning in index order, so the solver
// is fully deterministic.
Hyperplane fit_svm(const LabeledPoints& data, const FitConfig& cfg) {
  cfg.validate();
  check_data(data);
  const std::size_t n = data.points.size();
  const auto kernel = kernels::dot_matrix(data.points, data.points);
  const auto& y = data.labels;

  Vector upper(n);
  for (std::size_t k = 0; k < n; ++k) upper[k] = cfg.c * data.weights[k];
  Vector alpha(n, 0.0);
  Vector grad(n, -1.0);
  auto q = [&](std::size_t i, std::size_t j) { return y[i] * y[j] * kernel(i, j); };
  auto dual_objective = [&] {
    long double acc = 0.0L;
    for (std::size_t k = 0; k < n; ++k) acc += alpha[k] * (grad[k] - 1.0);
    return static_cast<double>(0.5L * acc);
  };
  auto in_up = [&](std::size_t t) {
    return (y[t] == 1 && alpha[t] < upper[t]) || (y[t] == -1 && alpha[t] > 0.0);
  };
  auto in_low = [&](std::size_t t) {
    return (y[t] == 1 && alpha[t] > 0.0) || (y[t] == -1 && alpha[t] < upper[t]);
  };

  constexpr double kTau = 1e-12;
  const long long limit = std::max<long long>(cfg.max_iters, 100LL * static_cast<long long>(n));
  Hyperplane h;
  h.fitter = Fitter::svm;
  h.objective_trace.push_back(dual_objective());
  long long iter = 0;
  for (; iter < limit; ++iter) {
    double gmax = -std::numeric_limits<double>::infinity();
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (in_up(t) && -y[t] * grad[t] > gmax) {
        gmax = -y[t] * grad[t];
        i = t;
      }
    }
    double gmin = std::numeric_limits<double>::infinity();
    double best_gain = std::numeric_limits<double>::infinity();
    std::size_t j = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (!in_low(t)) continue;
      const double v = -y[t] * grad[t];
      gmin = std::min(gmin, v);
      if (i == n) continue;
      const double diff = gmax - v;
      if (diff > 0.0) {
        double curvature = kernel(i, i) + kernel(t, t) - 2.0 * kernel(i, t);
        if (curvature <= 0.0) curvature = kTau;
        const double gain = -(diff * diff) / curvature;
        if (gain < best_gain) {
          best_gain = gain;
          j = t;
        }
      }
    }
    if (i == n || j == n || gmax - gmin <= cfg.tol) {
      h.converged = true;
      break;
    }

    const double old_i = alpha[i];
    const double old_j = alpha[j];
    if (y[i] != y[j]) {
      double quad = kernel(i, i) + kernel(j, j) + 2.0 * q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = diff; }
      } else {
        if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = -diff; }
      }
      if (diff > upper[i] - upper[j]) {
        if (alpha[i] > upper[i]) { alpha[i] = upper[i]; alpha[j] = upper[i] - diff; }
      } else {
        if (alpha[j] > upper[j]) { alpha[j] = upper[j]; alpha[i] = upper[j] + diff; }
      }
    } else {
      double quad = kernel(i, i) + kernel(j, j) - 2.0 * q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > upper[i]) {
        if (alpha[i] > upper[i]) { alpha[i] = upper[i]; alpha[j] = sum - upper[i]; }
      } else {
        if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = sum; }
      }
      if (sum > upper[j]) {
        if (alpha[j] > upper[j]) { alpha[j] = upper[j]; alpha[i] = sum - upper[j]; }
      } else {
        if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = sum; }
      }
    }
    const double di = alpha[i] - old_i;
    const double dj = alpha[j] - old_j;
    for (std::size_t t = 0; t < n; ++t) grad[t] += q(t, i) * di + q(t, j) * dj;

    if ((iter + 1) % static_cast<long long>(n) == 0) h.objective_trace.push_back(dual_objective());
  }
  h.iterations = static_cast<int>(std::min<long long>(iter, std::numeric_limits<int>::max()));
  h.objective_trace.push_back(dual_objective());
  if (!h.converged) h.warnings.push_back("NotConverged: SMO iteration limit reached");

  Vector coef(n);
  for (std::size_t k = 0; k < n; ++k) coef[k] = alpha[k] * y[k];
  h.w = combine(data, coef);

  // Bias: average over free support vectors. With none free the optimal b
  // can be a whole interval; take its midpoint.
  long double free_sum = 0.0L;
  std::size_t free_count = 0;
  const double bound_eps = 1e-12;
  for (std::size_t k = 0; k < n; ++k) {
    const bool at_zero = alpha[k] <= bound_eps * std::max(1.0, upper[k]);
    const bool at_upper = alpha[k] >= upper[k] * (1.0 - bound_eps);
    if (!at_zero && !at_upper) {
      free_sum += y[k] - dot(h.w, data.points[k].values());
      ++free_count;
    }
  }
  h.b = free_count > 0 ? static_cast<double>(free_sum / free_count) : hinge_offset(data, h.w);
  h.objective = svm_primal_objective(data, h.w, h.b, cfg.c);
  require_nonzero_w(h);
  return h;
}

// Damped Newton on the primal. The Hessian block lambda*I + X^T D X is
// inverted through the n x n system lambda*I + D^1/2 K D^1/2 (Woodbury),
// and the bias is eliminated with a Schur complement.
Hyperplane fit_logistic(const LabeledPoints& data, const FitConfig& cfg) {
  cfg.validate();
  check_data(data);
  const std::size_t n = data.points.size();
  const std::size_t d = data.points.front().dim();
  const double lambda = 1.0 / cfg.c;
  const auto kernel = kernels::dot_matrix(data.points, data.points);

  Hyperplane h;
  h.fitter = Fitter::logistic;
  h.w.assign(d, 0.0);
  h.b = 0.0;
  double obj = logistic_objective(data, h.w, h.b, cfg.c);
  h.objective_trace.push_back(obj);

  auto project = [&](std::span<const double> r) {  // X r
    Vector out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = dot(data.points[k].values(), r);
    return out;
  };

  int iter = 0;
  for (; iter < cfg.max_iters; ++iter) {
    Vector margin_weight(n);  // -y_k w_k sigma(-y_k f_k)
    Vector curvature(n);      // w_k p (1-p)
    Vector grad_w = scale(h.w, lambda);
    double grad_b = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double f = dot(h.w, data.points[k].values()) + h.b;
      const double z = data.labels[k] * f;
      const double s = sigmoid(-z);
      margin_weight[k] = -data.labels[k] * data.weights[k] * s;
      curvature[k] = data.weights[k] * s * (1.0 - s);
      axpy(margin_weight[k], data.points[k].values(), grad_w);
      grad_b += margin_weight[k];
    }

    linalg::Matrix m(n, n);
    Vector root(n);
    for (std::size_t k = 0; k < n; ++k) root[k] = std::sqrt(curvature[k]);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t c = 0; c < n; ++c) m(a, c) = root[a] * kernel(a, c) * root[c];
    for (std::size_t a = 0; a < n; ++a) m(a, a) += lambda;
    if (!linalg::cholesky_in_place(m)) {
      throw Error(ErrorCode::SingularCovariance, "logistic Hessian is not positive definite");
    }
    // A^{-1} r = (r - X^T D^1/2 M^{-1} D^1/2 X r) / lambda
    auto solve_a = [&](std::span<const double> r) {
      Vector xr = project(r);
      for (std::size_t k = 0; k < n; ++k) xr[k] *= root[k];
      Vector t = linalg::cholesky_solve(m, xr);
      Vector out(r.begin(), r.end());
      for (std::size_t k = 0; k < n; ++k) axpy(-root[k] * t[k], data.points[k].values(), out);
      for (double& v : out) v /= lambda;
      return out;
    };
    Vector u(d, 0.0);
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      axpy(curvature[k], data.points[k].values(), u);
      s += curvature[k];
    }
    const Vector a_grad = solve_a(grad_w);
    const Vector a_u = solve_a(u);
    const double schur = std::max(s - dot(u, a_u), 1e-12 * std::max(1.0, s));
    const double step_b = (grad_b - dot(u, a_grad)) / schur;
    Vector step_w = a_grad;
    axpy(-step_b, a_u, step_w);

    const double decrement = dot(grad_w, step_w) + grad_b * step_b;
    if (!(0.5 * decrement > 1e-3 * cfg.tol * std::max(1.0, std::abs(obj)))) {
      h.converged = true;
      break;
    }

    double t = 1.0;
    double next = obj;
    Vector w_next;
    double b_next = h.b;
    for (int ls = 0; ls < 60; ++ls) {
      w_next = h.w;
      axpy(-t, step_w, w_next);
      b_next = h.b - t * step_b;
      next = logistic_objective(data, w_next, b_next, cfg.c);
      if (next <= obj - 1e-4 * t * decrement) break;
      t *= 0.5;
    }
    if (!(next <= obj)) {
      h.converged = true;  // no further decrease representable
      break;
    }
    h.w = std::move(w_next);
    h.b = b_next;
    const double change = obj - next;
    obj = next;
    h.objective_trace.push_back(obj);
    if (t == 1.0 && change <= 1e-3 * cfg.tol * std::max(1.0, std::abs(obj))) {
      h.converged = true;
      ++iter;
      break;
    }
  }
  h.iterations = iter;
  h.objective = obj;
  if (!h.converged) h.warnings.push_back("NotConverged: Newton iteration limit reached");
  require_nonzero_w(h);
  return h;
}

// Weighted two-class LDA: w = (Sigma + ridge I)^{-1} (mu_T - mu_S), solved
// through the n x n Woodbury form since Sigma has rank at most n.
Hyperplane fit_lda(const LabeledPoints& data, const FitConfig& cfg) {
  cfg.validate();
  check_data(data);
  const std::size_t n = data.points.size();

  std::vector<Embedding> pos;
  std::vector<Embedding> neg;
  Vector pos_w;
  Vector neg_w;
  for (std::size_t k = 0; k < n; ++k) {
    (data.labels[k] == 1 ? pos : neg).push_back(data.points[k]);
    (data.labels[k] == 1 ? pos_w : neg_w).push_back(data.weights[k]);
  }
  const Vector mu_t = mean_embedding(pos, std::span<const double>(pos_w));
  const Vector mu_s = mean_embedding(neg, std::span<const double>(neg_w));
  const Vector mean_diff = subtract(mu_t, mu_s);

  long double total = 0.0L;
  for (double w : data.weights) total += w;
  std::vector<Embedding> centered;
  centered.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double s = std::sqrt(data.weights[k] / static_cast<double>(total));
    centered.emplace_back(
        scale(subtract(data.points[k].values(), data.labels[k] == 1 ? mu_t : mu_s), s));
  }
  const auto gram = kernels::dot_matrix(centered, centered);
  Vector um(n);
  for (std::size_t k = 0; k < n; ++k) um[k] = dot(centered[k].values(), mean_diff);

  Hyperplane h;
  h.fitter = Fitter::lda;
  double ridge = cfg.ridge;
  for (int attempt = 0;; ++attempt) {
    linalg::Matrix m = gram;
    for (std::size_t k = 0; k < n; ++k) m(k, k) += ridge;
    if (linalg::cholesky_in_place(m)) {
      const Vector t = linalg::cholesky_solve(m, um);
      h.w = mean_diff;
      for (std::size_t k = 0; k < n; ++k) axpy(-t[k], centered[k].values(), h.w);
      for (double& v : h.w) v /= ridge;
      break;
    }
    if (attempt >= 6) {
      throw Error(ErrorCode::SingularCovariance, "pooled covariance singular despite ridge");
    }
    ridge *= 10.0;
    h.warnings.push_back("SingularCovariance: ridge raised to " + std::to_string(ridge));
  }
  h.b = -0.5 * (dot(h.w, mu_t) + dot(h.w, mu_s));
  h.converged = true;
  require_nonzero_w(h);
  return h;
}

Hyperplane fit(Fitter fitter, const LabeledPoints& data, const FitConfig& cfg) {
  switch (fitter) {
    case Fitter::svm: return fit_svm(data, cfg);
    case Fitter::logistic: return fit_logistic(data, cfg);
    case Fitter::lda: return fit_lda(data, cfg);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown fitter");
}

Hyperplane fit_svm(const AttributeSet& source, const AttributeSet& target,
                   const WeightVector& weights, const FitConfig& cfg) {
  return fit_svm(LabeledPoints::from_sets(source, target, weights), cfg);
}

Hyperplane fit_logistic(const AttributeSet& source, const AttributeSet& target,
                        const WeightVector& weights, const FitConfig& cfg) {
  return fit_logistic(LabeledPoints::from_sets(source, target, weights), cfg);
}

Hyperplane fit_lda(const AttributeSet& source, const AttributeSet& target,
                   const WeightVector& weights, const FitConfig& cfg) {
  return fit_lda(LabeledPoints::from_sets(source, target, weights), cfg);
}

Hyperplane fit(Fitter fitter, const AttributeSet& source, const AttributeSet& target,
               const WeightVector& weights, const FitConfig& cfg) {
  return fit(fitter, LabeledPoints::from_sets(source, target, weights), cfg);
}

double misclassification_rate(const Hyperplane& h, const LabeledPoints& data) {
  if (data.points.empty()) return 0.0;
  std::size_t wrong = 0;
  for (std::size_t k = 0; k < data.points.size(); ++k) {
    const double f = h.decision(data.points[k].values());
    if (!(data.labels[k] * f > 0.0)) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(data.points.size());
}

double misclassification_rate(const Hyperplane& h, const AttributeSet& source,
                              const AttributeSet& target) {
  return misclassification_rate(
      h, LabeledPoints::from_sets(source, target, uniform_weights(source.size(), target.size())));
}

void write_fit_diagnostics(const Hyperplane& h, const std::filesystem::path& path) {
  nlohmann::json j;
  j["fitter"] = std::string(to_string(h.fitter));
  j["w"] = h.w;
  j["b"] = h.b;
  j["objective"] = h.objective;
  j["objective_trace"] = h.objective_trace;
  j["converged"] = h.converged;
  j["iterations"] = h.iterations;
  j["warnings"] = h.warnings;
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace augclip
