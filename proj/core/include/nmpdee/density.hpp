#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace nmpdee {

/// Density sampled on a uniform grid (cell centers or nodes) at one time.
struct DensityField {
  std::vector<double> grid;
  std::vector<double> values;
  double time = 0.0;

  /// Grid spacing; 0 for fewer than two points.
  double spacing() const;
};

/// Snapshots at the requested record times, all on the same grid, plus the
/// total mass of each snapshot.
struct DensityTrajectory {
  std::vector<DensityField> snapshots;
  std::vector<double> mass;

  const DensityField& at(double time) const;
};

/// "density_t<time>.csv" with time printed in shortest %g form.
std::string density_filename(double time);

/// CSV with header "x,p", one row per grid point, values printed with 17 significant digits.
void write_density_csv(const DensityField& field, const std::filesystem::path& file);
DensityField read_density_csv(const std::filesystem::path& file, double time = 0.0);

/// Uniform grid helpers.
std::vector<double> cell_centers(double a, double b, std::size_t n);
std::vector<double> nodes(double a, double b, std::size_t n_intervals);

}  // namespace nmpdee
