#pragma once

// Linear decision function f(x) = w.x + b with the target attributes on the
// positive side and the source attributes on the negative side.

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "augclip/attribute_set.hpp"
#include "augclip/geometry.hpp"
#include "augclip/weighting.hpp"

namespace augclip {

enum class Fitter { svm, logistic, lda };

std::string_view to_string(Fitter fitter) noexcept;
std::optional<Fitter> parse_fitter(std::string_view s) noexcept;

struct FitConfig {
  double c = 1.0;         // soft-margin constant; logistic uses lambda = 1/c
  int max_iters = 10000;
  double tol = 1e-8;
  double ridge = 1e-4;    // LDA covariance regularization

  // Throws InvalidArgument unless every field is positive.
  void validate() const;
};

struct Hyperplane {
  Vector w;
  double b = 0.0;
  Fitter fitter = Fitter::svm;
  // Solver objective recorded once per full pass, in minimization form.
  // For svm this is the dual objective (primal optimum = -dual optimum);
  // for logistic it is the primal objective; lda leaves it empty.
  std::vector<double> objective_trace;
  // Primal objective at the returned (w, b); 0 for lda.
  double objective = 0.0;
  bool converged = false;
  int iterations = 0;
  std::vector<std::string> warnings;

  double decision(std::span<const double> x) const;
};

// Points with labels +1 (target) / -1 (source) and nonnegative sample weights.
struct LabeledPoints {
  std::vector<Embedding> points;
  std::vector<int> labels;
  std::vector<double> weights;

  // Source points first, then target points, in set order.
  static LabeledPoints from_sets(const AttributeSet& source, const AttributeSet& target,
                                 const WeightVector& weights);
};

// Weighted soft-margin primal, 0.5|w|^2 + c * sum_k w_k * hinge(y_k f(x_k)).
double svm_primal_objective(const LabeledPoints& data, std::span<const double> w, double b,
                            double c);
// 0.5 (1/c) |w|^2 + sum_k w_k log(1 + exp(-y_k f(x_k))).
double logistic_objective(const LabeledPoints& data, std::span<const double> w, double b,
                          double c);

Hyperplane fit_svm(const LabeledPoints& data, const FitConfig& cfg = {});
Hyperplane fit_logistic(const LabeledPoints& data, const FitConfig& cfg = {});
Hyperplane fit_lda(const LabeledPoints& data, const FitConfig& cfg = {});
Hyperplane fit(Fitter fitter, const LabeledPoints& data, const FitConfig& cfg = {});

Hyperplane fit_svm(const AttributeSet& source, const AttributeSet& target,
                   const WeightVector& weights, const FitConfig& cfg = {});
Hyperplane fit_logistic(const AttributeSet& source, const AttributeSet& target,
                        const WeightVector& weights, const FitConfig& cfg = {});
Hyperplane fit_lda(const AttributeSet& source, const AttributeSet& target,
                   const WeightVector& weights, const FitConfig& cfg = {});
Hyperplane fit(Fitter fitter, const AttributeSet& source, const AttributeSet& target,
               const WeightVector& weights, const FitConfig& cfg = {});

// Fraction of attributes whose sign(f(x)) disagrees with their class.
// f(x) == 0 is an error for both classes.
double misclassification_rate(const Hyperplane& h, const AttributeSet& source,
                              const AttributeSet& target);
double misclassification_rate(const Hyperplane& h, const LabeledPoints& data);

// Writes w, b, and the objective trace as JSON.
void write_fit_diagnostics(const Hyperplane& h, const std::filesystem::path& path);

}  // namespace augclip
