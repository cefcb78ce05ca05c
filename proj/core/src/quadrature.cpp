#include "nmpdee/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nmpdee {

double legendre(std::size_t n, double x) {
  if (n == 0) return 1.0;
  double p0 = 1.0;
  double p1 = x;
  for (std::size_t k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

double legendre_derivative(std::size_t n, double x) {
  // P'_n = sum over k = n-1, n-3, ... of (2k+1) P_k; avoids the 1/(1-x^2) form at the ends.
  double d = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    if ((n - k) % 2 == 1) d += (2.0 * k + 1.0) * legendre(k, x);
  }
  return d;
}

GaussRule gauss_legendre(std::size_t n) {
  if (n == 0) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    // Tricomi initial guess, then Newton on P_n.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = p2;
      }
      const double pn = (n == 1) ? x : p1;
      const double pnm1 = (n == 1) ? 1.0 : p0;
      dp = static_cast<double>(n) * (x * pn - pnm1) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

double integrate_composite(const std::function<double(double)>& fn, double a, double b,
                           std::size_t panels, std::size_t points_per_panel) {
  const GaussRule rule = gauss_legendre(points_per_panel);
  const double width = (b - a) / static_cast<double>(panels);
  double sum = 0.0;
  for (std::size_t p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * width;
    double panel = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      panel += rule.weights[q] * fn(mid + 0.5 * width * rule.nodes[q]);
    }
    sum += 0.5 * width * panel;
  }
  return sum;
}

}  // namespace nmpdee
