#include "soilmaxvol/synth.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include <json.hpp>

#include "soilmaxvol/error.hpp"

namespace soilmaxvol {

SiteSpec SiteSpec::default_spec() {
  SiteSpec spec;
  // Extent 712.5 m x 542.5 m; the slope rises towards the north.
  spec.hollows = {
      {120.0, 450.0, 1.5, 60.0},  // open hollow, upper left
      {600.0, 430.0, 1.5, 60.0},  // open hollow, upper right
      {360.0, 270.0, 1.2, 20.0},  // closed depression mid-slope
      {240.0, 190.0, 0.8, 15.0},  // smaller closed depression
  };
  return spec;
}

void SiteSpec::validate() const {
  if (nrows < 1 || ncols < 1) throw InvalidArgument("site needs at least one cell");
  if (!(cellsize > 0.0)) throw InvalidArgument("cellsize must be positive");
  if (noise_spacing < 1) throw InvalidArgument("noise_spacing must be >= 1");
  if (noise_amplitude < 0.0) throw InvalidArgument("noise_amplitude must be >= 0");
  for (const Hollow& h : hollows) {
    if (!(h.amplitude > 0.0) || !(h.radius > 0.0)) {
      throw InvalidArgument("hollow amplitude and radius must be positive");
    }
  }
  if (!(rules.twi_dry < rules.twi_wet)) throw InvalidArgument("class rules need twi_dry < twi_wet");
  if (rules.depth_threshold < 0.0) throw InvalidArgument("depth_threshold must be >= 0");
}

RasterGrid generate_dem(const SiteSpec& spec) {
  spec.validate();
  GridGeometry geometry{spec.nrows, spec.ncols, spec.xllcorner, spec.yllcorner, spec.cellsize};
  RasterGrid dem(geometry, RasterGrid::kDefaultNodata, 0.0);

  // Coarse lattice of uniform values, bilinearly interpolated.
  const std::size_t sp = spec.noise_spacing;
  const std::size_t lat_rows = spec.nrows / sp + 2;
  const std::size_t lat_cols = spec.ncols / sp + 2;
  std::vector<double> lattice(lat_rows * lat_cols, 0.0);
  std::mt19937_64 rng(spec.seed.value);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (double& v : lattice) v = spec.noise_amplitude * unit(rng);

  for (std::size_t r = 0; r < spec.nrows; ++r) {
    for (std::size_t c = 0; c < spec.ncols; ++c) {
      const auto [x, y] = geometry.cell_center(r, c);
      double z = spec.base_elevation + spec.gradient_x * (x - spec.xllcorner) +
                 spec.gradient_y * (y - spec.yllcorner);
      for (const Hollow& h : spec.hollows) {
        const double d2 = (x - h.x) * (x - h.x) + (y - h.y) * (y - h.y);
        z -= h.amplitude * std::exp(-d2 / (2.0 * h.radius * h.radius));
      }
      if (spec.noise_amplitude > 0.0) {
        const double fr = static_cast<double>(r) / static_cast<double>(sp);
        const double fc = static_cast<double>(c) / static_cast<double>(sp);
        const auto r0 = static_cast<std::size_t>(fr);
        const auto c0 = static_cast<std::size_t>(fc);
        const double tr = fr - static_cast<double>(r0);
        const double tc = fc - static_cast<double>(c0);
        auto at = [&](std::size_t i, std::size_t j) { return lattice[i * lat_cols + j]; };
        z += (1.0 - tr) * ((1.0 - tc) * at(r0, c0) + tc * at(r0, c0 + 1)) +
             tr * ((1.0 - tc) * at(r0 + 1, c0) + tc * at(r0 + 1, c0 + 1));
      }
      dem(r, c) = z;
    }
  }
  return dem;
}

RasterGrid classify_terrain(const TerrainLayers& layers, const ClassRules& rules) {
  RasterGrid classes = layers.twi.like(layers.twi.nodata_value());
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (layers.twi.is_nodata_index(i) || layers.depressions.is_nodata_index(i)) continue;
    const double depth = layers.depressions.values()[i];
    const double wetness = layers.twi.values()[i];
    int label = 1;
    if (depth > rules.depth_threshold) {
      label = 3;
    } else if (wetness > rules.twi_wet) {
      label = 2;
    } else if (wetness < rules.twi_dry) {
      label = 0;
    }
    classes.values()[i] = label;
  }
  return classes;
}

std::map<int, std::size_t> class_histogram(const RasterGrid& classes) {
  std::map<int, std::size_t> hist{{0, 0}, {1, 0}, {2, 0}, {3, 0}};
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (!classes.is_nodata_index(i)) ++hist[static_cast<int>(classes.values()[i])];
  }
  return hist;
}

Site generate_site(const SiteSpec& spec) {
  RasterGrid dem = generate_dem(spec);
  if (dem.nrows() < 3 || dem.ncols() < 3) throw TooSmall("synthetic site needs at least 3 x 3 cells");
  const TerrainLayers layers = derive_terrain(dem);
  RasterGrid classes = classify_terrain(layers, spec.rules);
  const auto hist = class_histogram(classes);
  for (const auto& [label, count] : hist) {
    if (count == 0) {
      std::ostringstream msg;
      msg << "class " << label << " is empty; histogram:";
      for (const auto& [l, n] : hist) msg << ' ' << l << '=' << n;
      throw DegenerateSpec(hist, msg.str());
    }
  }
  return {std::move(dem), ClassMap::from_grid(std::move(classes))};
}

std::string site_spec_to_json(const SiteSpec& spec) {
  nlohmann::ordered_json j;
  j["nrows"] = spec.nrows;
  j["ncols"] = spec.ncols;
  j["cellsize"] = spec.cellsize;
  j["xllcorner"] = spec.xllcorner;
  j["yllcorner"] = spec.yllcorner;
  j["base_elevation"] = spec.base_elevation;
  j["gradient_x"] = spec.gradient_x;
  j["gradient_y"] = spec.gradient_y;
  j["hollows"] = nlohmann::ordered_json::array();
  for (const Hollow& h : spec.hollows) {
    j["hollows"].push_back({{"x", h.x}, {"y", h.y}, {"amplitude", h.amplitude}, {"radius", h.radius}});
  }
  j["noise_amplitude"] = spec.noise_amplitude;
  j["noise_spacing"] = spec.noise_spacing;
  j["seed"] = spec.seed.value;
  j["rules"] = {{"depth_threshold", spec.rules.depth_threshold},
                {"twi_dry", spec.rules.twi_dry},
                {"twi_wet", spec.rules.twi_wet}};
  return j.dump(2);
}

SiteSpec site_spec_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(0, std::string("site spec: ") + e.what());
  }
  SiteSpec spec = SiteSpec::default_spec();
  try {
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("nrows", spec.nrows);
    get("ncols", spec.ncols);
    get("cellsize", spec.cellsize);
    get("xllcorner", spec.xllcorner);
    get("yllcorner", spec.yllcorner);
    get("base_elevation", spec.base_elevation);
    get("gradient_x", spec.gradient_x);
    get("gradient_y", spec.gradient_y);
    get("noise_amplitude", spec.noise_amplitude);
    get("noise_spacing", spec.noise_spacing);
    get("seed", spec.seed.value);
    if (j.contains("hollows")) {
      spec.hollows.clear();
      for (const auto& h : j.at("hollows")) {
        spec.hollows.push_back({h.at("x").get<double>(), h.at("y").get<double>(),
                                h.at("amplitude").get<double>(), h.at("radius").get<double>()});
      }
    }
    if (j.contains("rules")) {
      const auto& r = j.at("rules");
      if (r.contains("depth_threshold")) spec.rules.depth_threshold = r.at("depth_threshold").get<double>();
      if (r.contains("twi_dry")) spec.rules.twi_dry = r.at("twi_dry").get<double>();
      if (r.contains("twi_wet")) spec.rules.twi_wet = r.at("twi_wet").get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("site spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

}  // namespace soilmaxvol
