#pragma once

#include <functional>

namespace svmbcm {

/// Adaptive Gauss-Legendre quadrature: a 20-point rule on each panel, split
/// in half until whole-panel and two-half estimates agree to the panel's share
/// of `abs_tol`. Returns 0 for an empty or reversed range.
double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol = 1e-12);

/// Standard normal density and distribution function.
double normal_pdf(double x);
double normal_cdf(double x);

}  // namespace svmbcm
