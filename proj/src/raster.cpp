#include "soilmaxvol/raster.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string_view>

#include "soilmaxvol/error.hpp"

namespace soilmaxvol {

std::pair<double, double> GridGeometry::cell_center(std::size_t row, std::size_t col) const {
  const double x = xllcorner + (static_cast<double>(col) + 0.5) * cellsize;
  const double y = yllcorner + (static_cast<double>(nrows - row) - 0.5) * cellsize;
  return {x, y};
}

RasterGrid::RasterGrid(GridGeometry geometry, double nodata_value, std::vector<double> values)
    : geometry_(geometry), nodata_(nodata_value), values_(std::move(values)) {
  if (geometry_.nrows < 1 || geometry_.ncols < 1) throw InvalidArgument("grid needs at least one cell");
  if (!(geometry_.cellsize > 0.0) || !std::isfinite(geometry_.cellsize)) {
    throw InvalidArgument("cellsize must be positive");
  }
  if (values_.size() != geometry_.nrows * geometry_.ncols) {
    throw InvalidArgument("value count does not match nrows * ncols");
  }
  for (double v : values_) {
    if (v != nodata_ && !std::isfinite(v)) throw InvalidArgument("non-finite cell value");
  }
}

RasterGrid::RasterGrid(GridGeometry geometry, double nodata_value, double fill)
    : RasterGrid(geometry, nodata_value, std::vector<double>(geometry.nrows * geometry.ncols, fill)) {}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return out;
}

std::optional<double> parse_number(std::string_view token) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return value;
}

std::optional<std::size_t> parse_count(std::string_view token) {
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) return std::nullopt;
  return value;
}

bool starts_with_letter(const std::string& line) {
  for (char ch : line) {
    if (std::isspace(static_cast<unsigned char>(ch))) continue;
    return std::isalpha(static_cast<unsigned char>(ch)) != 0;
  }
  return false;
}

}  // namespace

RasterGrid read_asc(std::istream& in) {
  std::optional<std::size_t> ncols, nrows;
  std::optional<double> xll, yll, cellsize;
  bool x_center = false;
  bool y_center = false;
  double nodata = RasterGrid::kDefaultNodata;

  std::string line;
  std::size_t line_no = 0;
  bool have_pending = false;

  while (true) {
    if (!std::getline(in, line)) break;
    ++line_no;
    if (!starts_with_letter(line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      have_pending = true;
      break;
    }
    std::istringstream fields(line);
    std::string key, value, extra;
    fields >> key >> value;
    if (value.empty() || (fields >> extra)) throw ParseError(line_no, "expected '<key> <value>' header line");
    key = lower(key);
    const auto number = parse_number(value);
    if (!number) throw ParseError(line_no, "non-numeric header value '" + value + "'");
    if (key == "ncols" || key == "nrows") {
      const auto count = parse_count(value);
      if (!count || *count == 0) throw ParseError(line_no, key + " must be a positive integer");
      (key == "ncols" ? ncols : nrows) = *count;
    } else if (key == "xllcorner" || key == "xllcenter") {
      xll = *number;
      x_center = key == "xllcenter";
    } else if (key == "yllcorner" || key == "yllcenter") {
      yll = *number;
      y_center = key == "yllcenter";
    } else if (key == "cellsize") {
      if (!(*number > 0.0)) throw ParseError(line_no, "cellsize must be positive");
      cellsize = *number;
    } else if (key == "nodata_value") {
      nodata = *number;
    } else {
      throw ParseError(line_no, "unknown header key '" + key + "'");
    }
  }
  if (!ncols || !nrows || !xll || !yll || !cellsize) {
    throw ParseError(line_no, "header must define ncols, nrows, xllcorner|xllcenter, "
                              "yllcorner|yllcenter and cellsize");
  }

  GridGeometry geometry;
  geometry.ncols = *ncols;
  geometry.nrows = *nrows;
  geometry.cellsize = *cellsize;
  geometry.xllcorner = x_center ? *xll - *cellsize / 2.0 : *xll;
  geometry.yllcorner = y_center ? *yll - *cellsize / 2.0 : *yll;

  const std::size_t expected = geometry.ncols * geometry.nrows;
  std::vector<double> values;
  values.reserve(expected);

  auto consume = [&](const std::string& text) {
    std::istringstream tokens(text);
    std::string token;
    while (tokens >> token) {
      if (values.size() == expected) throw ParseError(line_no, "more cell values than nrows * ncols");
      const auto v = parse_number(token);
      if (!v) throw ParseError(line_no, "non-numeric cell value '" + token + "'");
      if (*v != nodata && !std::isfinite(*v)) throw ParseError(line_no, "non-finite cell value");
      values.push_back(*v);
    }
  };
  if (have_pending) consume(line);
  while (std::getline(in, line)) {
    ++line_no;
    consume(line);
  }
  if (values.size() != expected) {
    throw ParseError(line_no, "expected " + std::to_string(expected) + " cell values, found " +
                                  std::to_string(values.size()));
  }
  return RasterGrid(geometry, nodata, std::move(values));
}

RasterGrid read_asc_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("IOError", "cannot open '" + path + "'");
  return read_asc(in);
}

namespace {

void put_number(std::ostream& out, double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  std::string_view s(buf);
  if (s == "-0" || (s.starts_with("-0.") && s.find_first_not_of("0.", 1) == std::string_view::npos)) {
    s.remove_prefix(1);
  }
  out << s;
}

void put_header_number(std::ostream& out, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

}  // namespace

void write_asc(std::ostream& out, const RasterGrid& grid, int precision) {
  const GridGeometry& g = grid.geometry();
  out << "ncols " << g.ncols << '\n';
  out << "nrows " << g.nrows << '\n';
  out << "xllcorner ";
  put_header_number(out, g.xllcorner);
  out << "\nyllcorner ";
  put_header_number(out, g.yllcorner);
  out << "\ncellsize ";
  put_header_number(out, g.cellsize);
  out << "\nNODATA_value ";
  put_header_number(out, grid.nodata_value());
  out << '\n';
  for (std::size_t r = 0; r < g.nrows; ++r) {
    for (std::size_t c = 0; c < g.ncols; ++c) {
      if (c) out << ' ';
      if (grid.is_nodata(r, c)) {
        put_header_number(out, grid.nodata_value());
      } else {
        put_number(out, grid(r, c), precision);
      }
    }
    out << '\n';
  }
}

std::string write_asc_string(const RasterGrid& grid, int precision) {
  std::ostringstream out;
  write_asc(out, grid, precision);
  return out.str();
}

void write_asc_file(const std::string& path, const RasterGrid& grid, int precision) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("IOError", "cannot write '" + path + "'");
  write_asc(out, grid, precision);
}

std::pair<double, double> cell_to_world(const RasterGrid& grid, std::size_t row, std::size_t col) {
  if (row >= grid.nrows() || col >= grid.ncols()) {
    throw OutOfBounds("cell (" + std::to_string(row) + ", " + std::to_string(col) + ") outside " +
                      std::to_string(grid.nrows()) + " x " + std::to_string(grid.ncols()) + " grid");
  }
  return grid.geometry().cell_center(row, col);
}

}  // namespace soilmaxvol
