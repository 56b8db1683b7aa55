#pragma once

#include <span>

namespace engrank {

// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction.
double incomplete_beta(double a, double b, double x);

// CDF of Student's t with `df` degrees of freedom.
double student_t_cdf(double t, double df);

struct TTestResult {
  double t_statistic = 0.0;
  double p_value = 1.0;  // two-sided
  int df = 0;
  double mean_difference = 0.0;
};

// Paired two-sided t-test on a - b. Throws Error{InvalidConfig} on length
// mismatch or fewer than 2 pairs, Error{DegenerateDifferences} when the
// differences have zero variance.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

}  // namespace engrank
