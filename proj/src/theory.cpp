#include "samrobust/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "samrobust/error.hpp"

namespace samrobust {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

void check_p_eta(double p, double eta) {
  if (!(p > 0.5 && p < 1.0)) {
    throw DomainError("p must lie in (0.5, 1), got " + std::to_string(p));
  }
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw DomainError("eta must be > 0, got " + std::to_string(eta));
  }
}

void check_eps_at(double eta, double eps_at) {
  if (!(eps_at >= 0.0)) throw DomainError("eps_at must be >= 0");
  if (!(eps_at < eta)) {
    throw DomainError("eps_at = " + std::to_string(eps_at) + " must be below eta = " +
                      std::to_string(eta));
  }
}

// Shared form of the accuracy: mean is the effective non-robust mean times d
// (eta d for clean data, (eta - eps) d under attack).
double accuracy(double w1, double p, double mean, double sqrt_d) {
  return p * normal_cdf((w1 + mean) / sqrt_d) + (1.0 - p) * normal_cdf((mean - w1) / sqrt_d);
}

double error(double w1, double p, double mean, double sqrt_d) {
  return p * normal_cdf(-(w1 + mean) / sqrt_d) + (1.0 - p) * normal_cdf((w1 - mean) / sqrt_d);
}

// Search score: a strictly increasing function of the accuracy u that keeps
// its resolution both where u is barely above p and where u is within 1e-12
// of one. With tails a = (w + mean)/sqrt d and b = (mean - w)/sqrt d,
//   gain  = u - p = (1 - p) Phi(b) - p Q(a)
//   error = 1 - u = p Q(a) + (1 - p) Q(b)
// are each formed from tails in long double (no underflow down to ~1e-4900),
// and the score is log(gain) - log(error), i.e. log((u - p)/(1 - u)). The
// maximiser always has positive gain; non-positive gains map below every
// log value while staying increasing.
double accuracy_score(double w1, double p, double mean, double sqrt_d) {
  const long double a = (static_cast<long double>(w1) + mean) / sqrt_d;
  const long double b = (static_cast<long double>(mean) - w1) / sqrt_d;
  const long double k = static_cast<long double>(kInvSqrt2);
  const long double lp = p;
  const long double q_a = 0.5L * std::erfc(a * k);
  const long double q_b = 0.5L * std::erfc(b * k);
  const long double phi_b = 0.5L * std::erfc(-b * k);
  const long double gain = (1.0L - lp) * phi_b - lp * q_a;
  constexpr double kFloor = -4.0e4;  // below 2 log(LDBL_TRUE_MIN) ~ -22800
  if (gain > 0.0L) {
    const long double err = lp * q_a + (1.0L - lp) * q_b;
    return static_cast<double>(std::log(gain) - std::log(err));
  }
  return kFloor + static_cast<double>(gain);
}

double golden_section_max(const std::function<double(double)>& f, double a, double b, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int iter = 0; iter < 500 && (b - a) > tol; ++iter) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
    if (!(c < d)) break;  // interval below representable resolution
  }
  return 0.5 * (a + b);
}

}  // namespace

void TheoryParams::validate() const {
  check_p_eta(p, eta);
  if (d < 1) throw DomainError("d must be >= 1, got " + std::to_string(d));
}

void MethodEpsilons::validate(const TheoryParams& tp) const {
  check_eps_at(tp.eta, eps_at);
  if (!(eps_sam >= 0.0)) throw DomainError("eps_sam must be >= 0");
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double clean_accuracy(double w1, const TheoryParams& tp) {
  return accuracy(w1, tp.p, tp.eta * tp.d, std::sqrt(static_cast<double>(tp.d)));
}

double clean_error(double w1, const TheoryParams& tp) {
  return error(w1, tp.p, tp.eta * tp.d, std::sqrt(static_cast<double>(tp.d)));
}

double adv_accuracy(double w1, const TheoryParams& tp, double eps_at) {
  check_eps_at(tp.eta, eps_at);
  return accuracy(w1, tp.p, (tp.eta - eps_at) * tp.d, std::sqrt(static_cast<double>(tp.d)));
}

double adv_error(double w1, const TheoryParams& tp, double eps_at) {
  check_eps_at(tp.eta, eps_at);
  return error(w1, tp.p, (tp.eta - eps_at) * tp.d, std::sqrt(static_cast<double>(tp.d)));
}

double sam_objective(double w1, const TheoryParams& tp, double eps_sam) {
  if (!(eps_sam >= 0.0)) throw DomainError("eps_sam must be >= 0");
  return std::min(clean_accuracy(w1 - eps_sam, tp), clean_accuracy(w1 + eps_sam, tp));
}

double sam_error(double w1, const TheoryParams& tp, double eps_sam) {
  if (!(eps_sam >= 0.0)) throw DomainError("eps_sam must be >= 0");
  return std::max(clean_error(w1 - eps_sam, tp), clean_error(w1 + eps_sam, tp));
}

double w1_star(double p, double eta) {
  check_p_eta(p, eta);
  return (std::log(p) - std::log1p(-p)) / (2.0 * eta);
}

double w1_at(double p, double eta, double eps_at) {
  check_p_eta(p, eta);
  check_eps_at(eta, eps_at);
  return (std::log(p) - std::log1p(-p)) / (2.0 * (eta - eps_at));
}

double w1_sam_approx(double p, double eta, double eps_sam) {
  if (!(eps_sam >= 0.0)) throw DomainError("eps_sam must be >= 0");
  return w1_star(p, eta) * (1.0 + (2.0 / 3.0) * eps_sam * eps_sam);
}

double epsilon_sam_from_at(double eta, double eps_at) {
  if (!(eta > 0.0)) throw DomainError("eta must be > 0");
  if (!(eps_at > 0.0)) throw DomainError("eps_at must be > 0");
  check_eps_at(eta, eps_at);
  return std::sqrt(3.0 / (2.0 * eta / eps_at - 2.0));
}

double default_search_hi(const TheoryParams& tp) {
  return 10.0 * w1_at(tp.p, tp.eta, 0.9 * tp.eta);
}

double argmax_scalar(const std::function<double(double)>& f, double lo, double hi, double tol,
                     int grid_points) {
  if (!(lo < hi)) throw UsageError("argmax_scalar: need lo < hi");
  if (!(tol > 0.0)) throw UsageError("argmax_scalar: need tol > 0");
  const int n = std::max(grid_points, 512);
  const double step = (hi - lo) / (n - 1);

  int best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double x = (i == n - 1) ? hi : lo + step * i;
    const double v = f(x);
    if (!std::isfinite(v)) {
      throw NumericError("argmax_scalar: f(" + std::to_string(x) + ") is not finite");
    }
    if (v > best_val) {  // strict: ties keep the smaller x
      best_val = v;
      best = i;
    }
  }
  const double a = lo + step * std::max(best - 1, 0);
  const double b = (best + 1 >= n - 1) ? hi : lo + step * (best + 1);
  return golden_section_max(f, a, b, tol);
}

double w1_clean_numeric(const TheoryParams& tp, double tol) {
  tp.validate();
  const double mean = tp.eta * tp.d;
  const double sqrt_d = std::sqrt(static_cast<double>(tp.d));
  return argmax_scalar([&](double w) { return accuracy_score(w, tp.p, mean, sqrt_d); }, 0.0,
                       default_search_hi(tp), tol);
}

double w1_at_numeric(const TheoryParams& tp, double eps_at, double tol) {
  tp.validate();
  check_eps_at(tp.eta, eps_at);
  const double mean = (tp.eta - eps_at) * tp.d;
  const double sqrt_d = std::sqrt(static_cast<double>(tp.d));
  return argmax_scalar([&](double w) { return accuracy_score(w, tp.p, mean, sqrt_d); }, 0.0,
                       default_search_hi(tp), tol);
}

double w1_sam_numeric(const TheoryParams& tp, double eps_sam, double tol) {
  tp.validate();
  if (!(eps_sam >= 0.0)) throw DomainError("eps_sam must be >= 0");
  if (!(tol > 0.0)) throw UsageError("w1_sam_numeric: need tol > 0");
  const double mean = tp.eta * tp.d;
  const double sqrt_d = std::sqrt(static_cast<double>(tp.d));
  // min over the two endpoints commutes with the increasing score.
  auto score = [&](double w) {
    return std::min(accuracy_score(w - eps_sam, tp.p, mean, sqrt_d),
                    accuracy_score(w + eps_sam, tp.p, mean, sqrt_d));
  };

  constexpr int kGrid = 1024;
  constexpr int kMaxWidenings = 8;
  const double lo = 0.0;
  double hi = default_search_hi(tp);
  for (int attempt = 0; attempt <= kMaxWidenings; ++attempt) {
    const double step = (hi - lo) / (kGrid - 1);
    int best = 0;
    double best_val = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < kGrid; ++i) {
      const double v = score(i == kGrid - 1 ? hi : lo + step * i);
      if (!std::isfinite(v)) throw NumericError("w1_sam_numeric: non-finite objective");
      if (v > best_val) {
        best_val = v;
        best = i;
      }
    }
    if (best < kGrid - 1) {
      const double a = lo + step * std::max(best - 1, 0);
      const double b = lo + step * (best + 1);
      return golden_section_max(score, a, b, tol);
    }
    hi *= 2.0;
  }
  throw SearchIntervalError("w1_sam_numeric: maximum not bracketed in [" + std::to_string(lo) +
                                ", " + std::to_string(hi) + "]",
                            lo, hi);
}

}  // namespace samrobust
