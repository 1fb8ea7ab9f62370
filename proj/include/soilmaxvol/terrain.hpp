#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "soilmaxvol/maxvol.hpp"
#include "soilmaxvol/raster.hpp"

namespace soilmaxvol {

struct SlopeAspect {
  RasterGrid slope;   ///< radians
  RasterGrid aspect;  ///< radians in [0, 2pi), 0 = north, clockwise
  RasterGrid flat;    ///< 1 where the gradient vanishes, else 0
};

/// Horn 3x3 gradients with replicated edges. NODATA neighbours are replaced by
/// the centre value; NODATA cells stay NODATA. Throws TooSmall below 3 x 3.
SlopeAspect slope_aspect(const RasterGrid& dem);

struct FilledDem {
  RasterGrid filled;
  RasterGrid depressions;  ///< filled - dem, exactly 0 outside closed depressions
};

/// Priority-flood filling (8-connected) seeded from the grid border and from
/// cells next to NODATA.
FilledDem fill_depressions(const RasterGrid& dem);

/// D8 flow accumulation in cell counts. Each cell drains to its steepest
/// strictly-lower neighbour (ties in E, SE, S, SW, W, NW, N, NE order). Cells
/// without a lower neighbour are outlets. Expects a DEM filled by
/// fill_depressions.
RasterGrid flow_accumulation(const RasterGrid& dem);

/// ln(accumulation * cellsize / max(tan(slope), min_tan_slope)).
RasterGrid twi(const RasterGrid& slope, const RasterGrid& accumulation, double cellsize,
               double min_tan_slope = 0.001);

/// The five morphometric layers used as sampling features.
struct TerrainLayers {
  RasterGrid slope;
  RasterGrid aspect;
  RasterGrid depressions;
  RasterGrid accumulation;
  RasterGrid twi;
};

TerrainLayers derive_terrain(const RasterGrid& dem, double min_tan_slope = 0.001);

struct NamedLayer {
  std::string name;
  RasterGrid grid;
};

/// Layers in feature-column order: slope, aspect, depressions, accumulation, twi.
std::vector<NamedLayer> named_layers(const TerrainLayers& layers);

struct NormRecord {
  std::string name;
  double min = 0.0;
  double max = 0.0;
  /// Constant column, normalised to all zeros.
  bool degenerate = false;
};

/// Tall feature matrix over the jointly valid pixels of a grid. The last two
/// columns are the min-max normalised x and y cell-centre coordinates.
struct FeatureMatrix {
  Matrix matrix;
  std::vector<std::pair<std::size_t, std::size_t>> pixel_index;
  std::vector<std::string> feature_names;
  std::vector<NormRecord> norm_records;
  GridGeometry geometry;
  std::vector<std::string> warnings;

  std::size_t rows() const { return static_cast<std::size_t>(matrix.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(matrix.cols()); }

  /// Maps a normalised value of column `col` back to layer units.
  double denormalize(std::size_t col, double value) const;
};

/// Min-max normalises each layer over the valid pixels and appends x and y.
/// Constant columns become all-zero and are reported in `warnings`.
FeatureMatrix build_feature_matrix(const std::vector<NamedLayer>& layers, const RasterGrid& dem);

/// Copy of `fm` without the two coordinate columns.
FeatureMatrix drop_coordinates(const FeatureMatrix& fm);

}  // namespace soilmaxvol
