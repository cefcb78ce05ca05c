#include "nmpdee/density.hpp"

#include <fmt/format.h>
#include <fmt/os.h>

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nmpdee {

double DensityField::spacing() const {
  if (grid.size() < 2) return 0.0;
  return (grid.back() - grid.front()) / static_cast<double>(grid.size() - 1);
}

const DensityField& DensityTrajectory::at(double time) const {
  for (const auto& s : snapshots) {
    if (std::abs(s.time - time) <= 1e-9 * std::max(1.0, std::abs(time))) return s;
  }
  throw std::out_of_range(fmt::format("no snapshot recorded at t = {:g}", time));
}

std::string density_filename(double time) { return fmt::format("density_t{:g}.csv", time); }

void write_density_csv(const DensityField& field, const std::filesystem::path& file) {
  if (field.grid.size() != field.values.size()) throw std::invalid_argument("density grid/value size mismatch");
  auto out = fmt::output_file(file.string());
  out.print("x,p\n");
  for (std::size_t i = 0; i < field.grid.size(); ++i) out.print("{:.17g},{:.17g}\n", field.grid[i], field.values[i]);
}

DensityField read_density_csv(const std::filesystem::path& file, double time) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open " + file.string());
  std::string line;
  std::getline(in, line);
  if (line != "x,p") throw std::runtime_error(file.string() + ": expected header x,p");
  DensityField field;
  field.time = time;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error(file.string() + ": malformed row");
    field.grid.push_back(std::stod(line.substr(0, comma)));
    field.values.push_back(std::stod(line.substr(comma + 1)));
  }
  return field;
}

std::vector<double> cell_centers(double a, double b, std::size_t n) {
  std::vector<double> x(n);
  const double h = (b - a) / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = a + (static_cast<double>(i) + 0.5) * h;
  return x;
}

std::vector<double> nodes(double a, double b, std::size_t n_intervals) {
  std::vector<double> x(n_intervals + 1);
  const double h = (b - a) / static_cast<double>(n_intervals);
  for (std::size_t i = 0; i <= n_intervals; ++i) x[i] = a + static_cast<double>(i) * h;
  x.back() = b;
  return x;
}

}  // namespace nmpdee
