#include "soilmaxvol/terrain.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <numbers>
#include <queue>
#include <tuple>

#include "soilmaxvol/error.hpp"

namespace soilmaxvol {

namespace {

// E, SE, S, SW, W, NW, N, NE. Row offsets grow southwards.
constexpr std::array<int, 8> kDRow = {0, 1, 1, 1, 0, -1, -1, -1};
constexpr std::array<int, 8> kDCol = {1, 1, 0, -1, -1, -1, 0, 1};

bool inside(const RasterGrid& g, long r, long c) {
  return r >= 0 && c >= 0 && r < static_cast<long>(g.nrows()) && c < static_cast<long>(g.ncols());
}

void require_same_shape(const RasterGrid& a, const RasterGrid& b, const char* what) {
  if (!a.same_shape(b)) throw ShapeMismatch(std::string(what) + ": grids differ in shape or georeferencing");
}

}  // namespace

SlopeAspect slope_aspect(const RasterGrid& dem) {
  if (dem.nrows() < 3 || dem.ncols() < 3) {
    throw TooSmall("slope/aspect need at least 3 x 3 cells, got " + std::to_string(dem.nrows()) + " x " +
                   std::to_string(dem.ncols()));
  }
  const double nodata = dem.nodata_value();
  SlopeAspect out{dem.like(nodata), dem.like(nodata), dem.like(nodata)};
  const long nr = static_cast<long>(dem.nrows());
  const long nc = static_cast<long>(dem.ncols());
  const double cs = dem.cellsize();

  for (long r = 0; r < nr; ++r) {
    for (long c = 0; c < nc; ++c) {
      if (dem.is_nodata(r, c)) continue;
      const double centre = dem(r, c);
      auto z = [&](long dr, long dc) {
        const long rr = std::clamp(r + dr, 0L, nr - 1);
        const long cc = std::clamp(c + dc, 0L, nc - 1);
        return dem.is_nodata(rr, cc) ? centre : dem(rr, cc);
      };
      const double a = z(-1, -1), b = z(-1, 0), cc = z(-1, 1);
      const double d = z(0, -1), f = z(0, 1);
      const double g = z(1, -1), h = z(1, 0), i = z(1, 1);
      const double zx = ((cc + 2.0 * f + i) - (a + 2.0 * d + g)) / (8.0 * cs);
      const double zy = ((a + 2.0 * b + cc) - (g + 2.0 * h + i)) / (8.0 * cs);
      const double grad = std::hypot(zx, zy);

      out.slope(r, c) = std::atan(grad);
      if (grad < 1e-12) {
        out.aspect(r, c) = 0.0;
        out.flat(r, c) = 1.0;
        continue;
      }
      // Downslope direction (-zx, -zy), measured clockwise from north.
      double aspect = std::atan2(-zx, -zy);
      if (aspect < 0.0) aspect += 2.0 * std::numbers::pi;
      if (aspect >= 2.0 * std::numbers::pi) aspect = 0.0;
      out.aspect(r, c) = aspect;
      out.flat(r, c) = 0.0;
    }
  }
  return out;
}

FilledDem fill_depressions(const RasterGrid& dem) {
  const std::size_t nr = dem.nrows();
  const std::size_t nc = dem.ncols();
  RasterGrid filled = dem;
  std::vector<char> closed(dem.size(), 0);

  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;

  for (std::size_t r = 0; r < nr; ++r) {
    for (std::size_t c = 0; c < nc; ++c) {
      if (dem.is_nodata(r, c)) continue;
      bool seed = r == 0 || c == 0 || r + 1 == nr || c + 1 == nc;
      for (int k = 0; k < 8 && !seed; ++k) {
        const long rr = static_cast<long>(r) + kDRow[k];
        const long cc = static_cast<long>(c) + kDCol[k];
        seed = dem.is_nodata(rr, cc);
      }
      if (seed) {
        closed[r * nc + c] = 1;
        open.emplace(dem(r, c), r * nc + c);
      }
    }
  }

  while (!open.empty()) {
    const auto [level, index] = open.top();
    open.pop();
    const long r = static_cast<long>(index / nc);
    const long c = static_cast<long>(index % nc);
    for (int k = 0; k < 8; ++k) {
      const long rr = r + kDRow[k];
      const long cc = c + kDCol[k];
      if (!inside(dem, rr, cc)) continue;
      const std::size_t n = static_cast<std::size_t>(rr) * nc + static_cast<std::size_t>(cc);
      if (closed[n] || dem.is_nodata_index(n)) continue;
      closed[n] = 1;
      filled.values()[n] = std::max(dem.values()[n], level);
      open.emplace(filled.values()[n], n);
    }
  }

  RasterGrid depth = dem.like(dem.nodata_value());
  for (std::size_t i = 0; i < dem.size(); ++i) {
    if (!dem.is_nodata_index(i)) depth.values()[i] = filled.values()[i] - dem.values()[i];
  }
  return {std::move(filled), std::move(depth)};
}

RasterGrid flow_accumulation(const RasterGrid& dem) {
  const std::size_t nc = dem.ncols();
  const std::size_t cells = dem.size();
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  const double diagonal = std::sqrt(2.0) * dem.cellsize();

  std::vector<std::size_t> receiver(cells, kNone);
  std::vector<std::size_t> indegree(cells, 0);
  std::size_t valid = 0;

  for (std::size_t i = 0; i < cells; ++i) {
    if (dem.is_nodata_index(i)) continue;
    ++valid;
    const long r = static_cast<long>(i / nc);
    const long c = static_cast<long>(i % nc);
    const double z = dem.values()[i];
    double steepest = 0.0;
    for (int k = 0; k < 8; ++k) {
      const long rr = r + kDRow[k];
      const long cc = c + kDCol[k];
      if (!inside(dem, rr, cc) || dem.is_nodata(rr, cc)) continue;
      const double dist = (kDRow[k] != 0 && kDCol[k] != 0) ? diagonal : dem.cellsize();
      const double drop = (z - dem(rr, cc)) / dist;
      if (drop > steepest) {
        steepest = drop;
        receiver[i] = static_cast<std::size_t>(rr) * nc + static_cast<std::size_t>(cc);
      }
    }
    if (receiver[i] != kNone) ++indegree[receiver[i]];
  }

  RasterGrid acc = dem.like(dem.nodata_value());
  std::deque<std::size_t> ready;
  for (std::size_t i = 0; i < cells; ++i) {
    if (dem.is_nodata_index(i)) continue;
    acc.values()[i] = 1.0;
    if (indegree[i] == 0) ready.push_back(i);
  }
  std::size_t processed = 0;
  while (!ready.empty()) {
    const std::size_t u = ready.front();
    ready.pop_front();
    ++processed;
    const std::size_t v = receiver[u];
    if (v == kNone) continue;
    acc.values()[v] += acc.values()[u];
    if (--indegree[v] == 0) ready.push_back(v);
  }
  if (processed != valid) {
    throw CycleDetected(std::to_string(valid - processed) + " cells sit on a drainage cycle");
  }
  return acc;
}

RasterGrid twi(const RasterGrid& slope, const RasterGrid& accumulation, double cellsize,
               double min_tan_slope) {
  require_same_shape(slope, accumulation, "twi");
  if (!(min_tan_slope > 0.0)) throw InvalidArgument("twi slope clamp must be positive");
  RasterGrid out = slope.like(slope.nodata_value());
  for (std::size_t i = 0; i < slope.size(); ++i) {
    if (slope.is_nodata_index(i) || accumulation.is_nodata_index(i)) continue;
    const double tan_slope = std::max(std::tan(slope.values()[i]), min_tan_slope);
    out.values()[i] = std::log(accumulation.values()[i] * cellsize / tan_slope);
  }
  return out;
}

TerrainLayers derive_terrain(const RasterGrid& dem, double min_tan_slope) {
  SlopeAspect sa = slope_aspect(dem);
  FilledDem fd = fill_depressions(dem);
  RasterGrid acc = flow_accumulation(fd.filled);
  RasterGrid wetness = twi(sa.slope, acc, dem.cellsize(), min_tan_slope);
  return {std::move(sa.slope), std::move(sa.aspect), std::move(fd.depressions), std::move(acc),
          std::move(wetness)};
}

std::vector<NamedLayer> named_layers(const TerrainLayers& layers) {
  return {{"slope", layers.slope},
          {"aspect", layers.aspect},
          {"depressions", layers.depressions},
          {"accumulation", layers.accumulation},
          {"twi", layers.twi}};
}

double FeatureMatrix::denormalize(std::size_t col, double value) const {
  const NormRecord& rec = norm_records.at(col);
  return rec.min + value * (rec.max - rec.min);
}

namespace {

NormRecord normalize_column(Eigen::Ref<Vector> column, const std::string& name,
                            std::vector<std::string>& warnings) {
  NormRecord rec{name, column.minCoeff(), column.maxCoeff(), false};
  if (rec.max > rec.min) {
    column = (column.array() - rec.min) / (rec.max - rec.min);
  } else {
    rec.degenerate = true;
    column.setZero();
    warnings.push_back("DegenerateColumn: '" + name + "' is constant over the valid pixels");
  }
  return rec;
}

}  // namespace

FeatureMatrix build_feature_matrix(const std::vector<NamedLayer>& layers, const RasterGrid& dem) {
  for (const NamedLayer& layer : layers) require_same_shape(layer.grid, dem, layer.name.c_str());

  FeatureMatrix fm;
  fm.geometry = dem.geometry();
  for (std::size_t r = 0; r < dem.nrows(); ++r) {
    for (std::size_t c = 0; c < dem.ncols(); ++c) {
      bool ok = !dem.is_nodata(r, c);
      for (const NamedLayer& layer : layers) ok = ok && !layer.grid.is_nodata(r, c);
      if (ok) fm.pixel_index.emplace_back(r, c);
    }
  }
  if (fm.pixel_index.empty()) throw EmptyInput("no pixel is valid in every layer");

  const auto m = static_cast<Eigen::Index>(fm.pixel_index.size());
  const auto n = static_cast<Eigen::Index>(layers.size() + 2);
  fm.matrix.resize(m, n);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto [r, c] = fm.pixel_index[static_cast<std::size_t>(i)];
      fm.matrix(i, static_cast<Eigen::Index>(l)) = layers[l].grid(r, c);
    }
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto [r, c] = fm.pixel_index[static_cast<std::size_t>(i)];
    const auto [x, y] = fm.geometry.cell_center(r, c);
    fm.matrix(i, n - 2) = x;
    fm.matrix(i, n - 1) = y;
  }

  for (const NamedLayer& layer : layers) fm.feature_names.push_back(layer.name);
  fm.feature_names.emplace_back("x");
  fm.feature_names.emplace_back("y");
  for (Eigen::Index j = 0; j < n; ++j) {
    fm.norm_records.push_back(
        normalize_column(fm.matrix.col(j), fm.feature_names[static_cast<std::size_t>(j)], fm.warnings));
  }
  return fm;
}

FeatureMatrix drop_coordinates(const FeatureMatrix& fm) {
  if (fm.cols() < 3) throw InvalidArgument("feature matrix has no terrain columns besides x, y");
  FeatureMatrix out = fm;
  const Eigen::Index keep = fm.matrix.cols() - 2;
  out.matrix = fm.matrix.leftCols(keep);
  out.feature_names.resize(static_cast<std::size_t>(keep));
  out.norm_records.resize(static_cast<std::size_t>(keep));
  return out;
}

}  // namespace soilmaxvol
