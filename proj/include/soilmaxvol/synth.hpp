#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "soilmaxvol/evaluation.hpp"
#include "soilmaxvol/raster.hpp"
#include "soilmaxvol/samplers.hpp"
#include "soilmaxvol/terrain.hpp"

namespace soilmaxvol {

/// Gaussian pit subtracted from the base surface:
/// amplitude * exp(-d^2 / (2 radius^2)), d measured from (x, y) in world units.
struct Hollow {
  double x = 0.0;
  double y = 0.0;
  double amplitude = 1.0;
  double radius = 10.0;
};

/// Ordered class rules, first match wins:
///   3  depression depth > depth_threshold
///   2  TWI > twi_wet
///   0  TWI < twi_dry
///   1  otherwise
struct ClassRules {
  double depth_threshold = 0.05;
  double twi_dry = 7.5;
  double twi_wet = 10.5;
};

struct SiteSpec {
  std::size_t nrows = 217;
  std::size_t ncols = 285;
  double cellsize = 2.5;
  double xllcorner = 0.0;
  double yllcorner = 0.0;
  double base_elevation = 200.0;
  double gradient_x = 0.004;
  double gradient_y = 0.02;
  std::vector<Hollow> hollows;
  double noise_amplitude = 0.05;
  /// Lattice spacing of the smooth noise, in cells.
  std::size_t noise_spacing = 12;
  RngSeed seed{42};
  ClassRules rules{};

  /// The documented default site: a tilted slope with two open hollows near
  /// the upper corners and two closed depressions mid-slope.
  static SiteSpec default_spec();

  /// Throws InvalidArgument when amplitudes, radii or thresholds are invalid.
  void validate() const;
};

struct Site {
  RasterGrid dem;
  ClassMap reference;
};

/// DEM from the spec plus reference classes from the rules over the derived
/// TWI and depression depth. Throws DegenerateSpec if a class is empty.
Site generate_site(const SiteSpec& spec);

/// DEM only (no class assignment).
RasterGrid generate_dem(const SiteSpec& spec);

/// Class raster from the rules, without the non-empty check.
RasterGrid classify_terrain(const TerrainLayers& layers, const ClassRules& rules);

std::map<int, std::size_t> class_histogram(const RasterGrid& classes);

/// JSON encoding of SiteSpec (fields as named above; hollows as objects).
std::string site_spec_to_json(const SiteSpec& spec);
/// Missing fields keep their default_spec() values.
SiteSpec site_spec_from_json(const std::string& text);

}  // namespace soilmaxvol
