#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nmpdee/density.hpp"

namespace nmpdee {

/// L2 = (int |P - Q|^2 dx)^{1/2} by the composite trapezoid rule on the shared grid.
double l2_error(const DensityField& approx, const DensityField& reference);
/// Max over grid points of |P - Q|.
double linf_error(const DensityField& approx, const DensityField& reference);
/// dx * sum(values) on a uniform grid.
double total_mass(const DensityField& field);

struct ErrorReport {
  std::string method;
  std::string reference;
  double time = 0.0;
  double l2 = 0.0;
  double linf = 0.0;
};

ErrorReport compare(const DensityField& approx, const DensityField& reference, std::string method,
                    std::string reference_label);

/// Error-table CSV with columns method,time,l2,linf.
void write_error_table(const std::vector<ErrorReport>& rows, const std::filesystem::path& file);

}  // namespace nmpdee
