#pragma once

// Binary classification model with one robust feature x1 in {-1, +1}
// (agreeing with the label with probability p) and d non-robust features
// x_i ~ N(eta * y, 1). A linear classifier sgn(w1 * x1 + sum_i x_i) is
// characterised by the single weight w1.

#include <functional>

namespace samrobust {

struct TheoryParams {
  double p = 0.9;
  double eta = 0.1;
  int d = 50;

  /// 0.5 < p < 1, eta > 0, d >= 1; throws DomainError.
  void validate() const;
};

struct MethodEpsilons {
  double eps_at = 0.0;
  double eps_sam = 0.0;

  void validate(const TheoryParams& tp) const;
};

/// Standard normal CDF.
double normal_cdf(double x);

/// Expected accuracy of the classifier with robust weight w1:
///   u(w1) = p * Phi((w1 + eta d)/sqrt d) + (1 - p) * Phi((-w1 + eta d)/sqrt d)
double clean_accuracy(double w1, const TheoryParams& tp);

/// 1 - clean_accuracy, evaluated through the upper tails so it keeps full
/// relative precision when the accuracy is within 1e-16 of one.
double clean_error(double w1, const TheoryParams& tp);

/// Accuracy under the worst l_inf attack of budget eps_at on the non-robust
/// features: clean_accuracy with eta replaced by eta - eps_at.
/// Requires 0 <= eps_at < eta (DomainError otherwise).
double adv_accuracy(double w1, const TheoryParams& tp, double eps_at);
double adv_error(double w1, const TheoryParams& tp, double eps_at);

/// min over |delta| <= eps of u(w1 + delta) = min(u(w1 - eps), u(w1 + eps)).
double sam_objective(double w1, const TheoryParams& tp, double eps_sam);
/// Complement of sam_objective: max(e(w1 - eps), e(w1 + eps)).
double sam_error(double w1, const TheoryParams& tp, double eps_sam);

/// (ln p - ln(1 - p)) / (2 eta). DomainError for p outside (0.5, 1) or eta <= 0.
double w1_star(double p, double eta);

/// (ln p - ln(1 - p)) / (2 (eta - eps_at)). DomainError unless 0 <= eps_at < eta.
double w1_at(double p, double eta, double eps_at);

/// w1_star * (1 + (2/3) eps_sam^2), the small-radius approximation.
double w1_sam_approx(double p, double eta, double eps_sam);

/// sqrt(3 / (2 eta / eps_at - 2)). DomainError unless 0 < eps_at < eta.
double epsilon_sam_from_at(double eta, double eps_at);

inline constexpr double kDefaultSearchTol = 1e-10;

/// Upper end of the default search interval: 10 * w1_at(p, eta, 0.9 eta).
double default_search_hi(const TheoryParams& tp);

/// Maximiser of f on [lo, hi]: a coarse grid (at least 512 points, ties go
/// to the smaller x) brackets the best grid point, then golden-section
/// search shrinks the bracket to width <= tol and returns its midpoint.
/// Throws NumericError when f is non-finite at a grid point.
double argmax_scalar(const std::function<double(double)>& f, double lo, double hi, double tol,
                     int grid_points = 1024);

/// Numerical argmax of u; the oracle for w1_star.
double w1_clean_numeric(const TheoryParams& tp, double tol = kDefaultSearchTol);
/// Numerical argmax of the adversarial accuracy.
double w1_at_numeric(const TheoryParams& tp, double eps_at, double tol = kDefaultSearchTol);

/// Numerical maximiser of sam_objective. Searches [0, default_search_hi],
/// doubling the upper end when the best grid point sits on it; throws
/// SearchIntervalError (carrying the last interval) if that keeps happening.
double w1_sam_numeric(const TheoryParams& tp, double eps_sam, double tol = kDefaultSearchTol);

}  // namespace samrobust
