#include "nmpdee/metrics.hpp"

#include <fmt/os.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nmpdee {

namespace {

void require_same_grid(const DensityField& a, const DensityField& b) {
  if (a.grid.size() != b.grid.size() || a.values.size() != a.grid.size() || b.values.size() != b.grid.size()) {
    throw std::invalid_argument("density fields are on different grids (size mismatch)");
  }
  for (std::size_t i = 0; i < a.grid.size(); ++i) {
    const double tol = 1e-9 * std::max(1.0, std::abs(a.grid[i]));
    if (std::abs(a.grid[i] - b.grid[i]) > tol) {
      throw std::invalid_argument("density fields are on different grids (point mismatch)");
    }
  }
}

}  // namespace

double l2_error(const DensityField& approx, const DensityField& reference) {
  require_same_grid(approx, reference);
  const std::size_t n = approx.grid.size();
  if (n < 2) return n == 1 ? std::abs(approx.values[0] - reference.values[0]) : 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double e0 = approx.values[i] - reference.values[i];
    const double e1 = approx.values[i + 1] - reference.values[i + 1];
    sum += 0.5 * (approx.grid[i + 1] - approx.grid[i]) * (e0 * e0 + e1 * e1);
  }
  return std::sqrt(sum);
}

double linf_error(const DensityField& approx, const DensityField& reference) {
  require_same_grid(approx, reference);
  double m = 0.0;
  for (std::size_t i = 0; i < approx.values.size(); ++i) {
    m = std::max(m, std::abs(approx.values[i] - reference.values[i]));
  }
  return m;
}

double total_mass(const DensityField& field) {
  double sum = 0.0;
  for (double v : field.values) sum += v;
  return field.spacing() * sum;
}

ErrorReport compare(const DensityField& approx, const DensityField& reference, std::string method,
                    std::string reference_label) {
  return {std::move(method), std::move(reference_label), approx.time, l2_error(approx, reference),
          linf_error(approx, reference)};
}

void write_error_table(const std::vector<ErrorReport>& rows, const std::filesystem::path& file) {
  auto out = fmt::output_file(file.string());
  out.print("method,time,l2,linf\n");
  for (const auto& r : rows) out.print("{},{:g},{:.6e},{:.6e}\n", r.method, r.time, r.l2, r.linf);
}

}  // namespace nmpdee
