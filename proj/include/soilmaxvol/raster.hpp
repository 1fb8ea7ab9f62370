#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace soilmaxvol {

/// Georeferencing of a north-up grid. Row 0 is the northernmost row.
struct GridGeometry {
  std::size_t nrows = 0;
  std::size_t ncols = 0;
  double xllcorner = 0.0;
  double yllcorner = 0.0;
  double cellsize = 1.0;

  bool operator==(const GridGeometry&) const = default;

  /// World coordinates of the centre of cell (row, col).
  std::pair<double, double> cell_center(std::size_t row, std::size_t col) const;
};

/// Single-band raster with a NODATA sentinel. Values are stored row-major.
class RasterGrid {
public:
  static constexpr double kDefaultNodata = -9999.0;

  RasterGrid() = default;
  RasterGrid(GridGeometry geometry, double nodata_value, std::vector<double> values);
  /// Grid filled with `fill`.
  RasterGrid(GridGeometry geometry, double nodata_value, double fill);

  const GridGeometry& geometry() const noexcept { return geometry_; }
  std::size_t nrows() const noexcept { return geometry_.nrows; }
  std::size_t ncols() const noexcept { return geometry_.ncols; }
  std::size_t size() const noexcept { return values_.size(); }
  double cellsize() const noexcept { return geometry_.cellsize; }
  double nodata_value() const noexcept { return nodata_; }

  double operator()(std::size_t row, std::size_t col) const { return values_[row * ncols() + col]; }
  double& operator()(std::size_t row, std::size_t col) { return values_[row * ncols() + col]; }

  bool is_nodata(std::size_t row, std::size_t col) const { return (*this)(row, col) == nodata_; }
  bool is_nodata_index(std::size_t index) const { return values_[index] == nodata_; }

  const std::vector<double>& values() const noexcept { return values_; }
  std::vector<double>& values() noexcept { return values_; }

  /// Same geometry and sentinel, all cells set to `fill`.
  RasterGrid like(double fill) const { return RasterGrid(geometry_, nodata_, fill); }

  bool same_shape(const RasterGrid& other) const { return geometry_ == other.geometry_; }

  bool operator==(const RasterGrid&) const = default;

private:
  GridGeometry geometry_;
  double nodata_ = kDefaultNodata;
  std::vector<double> values_;
};

/// Parses an ESRI ASCII grid. Header keys are case-insensitive; xllcenter /
/// yllcenter are converted to corner coordinates; NODATA_value defaults to -9999.
RasterGrid read_asc(std::istream& in);
RasterGrid read_asc_file(const std::string& path);

/// Writes an ESRI ASCII grid with `precision` digits after the decimal point.
void write_asc(std::ostream& out, const RasterGrid& grid, int precision = 6);
std::string write_asc_string(const RasterGrid& grid, int precision = 6);
void write_asc_file(const std::string& path, const RasterGrid& grid, int precision = 6);

/// Cell-centre world coordinates; throws OutOfBounds for invalid indices.
std::pair<double, double> cell_to_world(const RasterGrid& grid, std::size_t row, std::size_t col);

}  // namespace soilmaxvol
