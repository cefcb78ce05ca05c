#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace nmpdee {

/// Gauss–Legendre rule on the reference interval [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const noexcept { return nodes.size(); }
};

/// n-point Gauss–Legendre rule (n >= 1), exact for polynomials of degree 2n-1.
/// Nodes are returned in increasing order.
GaussRule gauss_legendre(std::size_t n);

/// Legendre polynomial P_n(x) and its derivative, by the three-term recurrence.
double legendre(std::size_t n, double x);
double legendre_derivative(std::size_t n, double x);

/// Composite Gauss–Legendre integral of fn over [a, b] with `panels` equal panels.
double integrate_composite(const std::function<double(double)>& fn, double a, double b,
                           std::size_t panels, std::size_t points_per_panel = 10);

}  // namespace nmpdee
