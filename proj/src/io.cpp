#include "soilmaxvol/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "soilmaxvol/error.hpp"

namespace soilmaxvol {

namespace {

std::string exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double to_double(const std::string& token, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError(line, "bad number '" + token + "'");
  }
  return v;
}

std::size_t to_index(const std::string& token, std::size_t line) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError(line, "bad index '" + token + "'");
  }
  return v;
}

}  // namespace

void write_feature_matrix(std::ostream& out, const FeatureMatrix& fm) {
  const GridGeometry& g = fm.geometry;
  out << "# soilmaxvol-features 1\n";
  out << "# grid " << g.ncols << ' ' << g.nrows << ' ' << exact(g.xllcorner) << ' ' << exact(g.yllcorner)
      << ' ' << exact(g.cellsize) << '\n';
  for (const NormRecord& rec : fm.norm_records) {
    out << "# norm " << rec.name << ' ' << exact(rec.min) << ' ' << exact(rec.max) << ' '
        << (rec.degenerate ? 1 : 0) << '\n';
  }
  for (const std::string& name : fm.feature_names) out << name << ',';
  out << "grid_row,grid_col\n";
  for (Eigen::Index i = 0; i < fm.matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < fm.matrix.cols(); ++j) out << exact(fm.matrix(i, j)) << ',';
    const auto [r, c] = fm.pixel_index[static_cast<std::size_t>(i)];
    out << r << ',' << c << '\n';
  }
}

FeatureMatrix read_feature_matrix(std::istream& in) {
  FeatureMatrix fm;
  std::string line;
  std::size_t line_no = 0;
  bool have_grid = false;
  std::vector<std::string> header;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] != '#') {
      header = split(line, ',');
      break;
    }
    std::istringstream meta(line.substr(1));
    std::string key;
    meta >> key;
    if (key == "grid") {
      std::string ncols, nrows, xll, yll, cs;
      if (!(meta >> ncols >> nrows >> xll >> yll >> cs)) throw ParseError(line_no, "incomplete grid line");
      fm.geometry = {to_index(nrows, line_no), to_index(ncols, line_no), to_double(xll, line_no),
                     to_double(yll, line_no), to_double(cs, line_no)};
      have_grid = true;
    } else if (key == "norm") {
      NormRecord rec;
      std::string lo, hi;
      int degenerate = 0;
      if (!(meta >> rec.name >> lo >> hi >> degenerate)) throw ParseError(line_no, "incomplete norm line");
      rec.min = to_double(lo, line_no);
      rec.max = to_double(hi, line_no);
      rec.degenerate = degenerate != 0;
      fm.norm_records.push_back(rec);
    }
  }
  if (!have_grid) throw ParseError(line_no, "missing '# grid' metadata line");
  if (header.size() < 3 || header[header.size() - 2] != "grid_row" || header.back() != "grid_col") {
    throw ParseError(line_no, "header must end with grid_row,grid_col");
  }
  const std::size_t n = header.size() - 2;
  fm.feature_names.assign(header.begin(), header.begin() + static_cast<long>(n));
  if (!fm.norm_records.empty() && fm.norm_records.size() != n) {
    throw ParseError(line_no, "norm records do not match the feature columns");
  }

  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != n + 2) {
      throw ParseError(line_no, "expected " + std::to_string(n + 2) + " fields, found " +
                                    std::to_string(fields.size()));
    }
    for (std::size_t j = 0; j < n; ++j) values.push_back(to_double(fields[j], line_no));
    const std::size_t r = to_index(fields[n], line_no);
    const std::size_t c = to_index(fields[n + 1], line_no);
    if (r >= fm.geometry.nrows || c >= fm.geometry.ncols) throw ParseError(line_no, "pixel outside the grid");
    fm.pixel_index.emplace_back(r, c);
  }
  if (fm.pixel_index.empty()) throw ParseError(line_no, "feature matrix has no rows");
  const auto m = static_cast<Eigen::Index>(fm.pixel_index.size());
  fm.matrix.resize(m, static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(n); ++j) {
      fm.matrix(i, j) = values[static_cast<std::size_t>(i) * n + static_cast<std::size_t>(j)];
    }
  }
  return fm;
}

void write_feature_matrix_file(const std::string& path, const FeatureMatrix& fm) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("IOError", "cannot write '" + path + "'");
  write_feature_matrix(out, fm);
}

FeatureMatrix read_feature_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("IOError", "cannot open '" + path + "'");
  return read_feature_matrix(in);
}

void write_design_csv(std::ostream& out, const SampleDesign& design) {
  out << "rank,matrix_row,grid_row,grid_col,world_x,world_y\n";
  for (std::size_t i = 0; i < design.points.size(); ++i) {
    const SamplePoint& p = design.points[i];
    out << i << ',' << p.matrix_row << ',' << p.grid_row << ',' << p.grid_col << ',' << exact(p.world_x)
        << ',' << exact(p.world_y) << '\n';
  }
}

void write_design_geojson(std::ostream& out, const SampleDesign& design) {
  nlohmann::ordered_json doc;
  doc["type"] = "FeatureCollection";
  doc["properties"] = {{"method", std::string(method_name(design.method))},
                       {"k", design.k},
                       {"epsilon", design.epsilon}};
  if (design.seed) doc["properties"]["seed"] = *design.seed;
  doc["features"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < design.points.size(); ++i) {
    const SamplePoint& p = design.points[i];
    nlohmann::ordered_json f;
    f["type"] = "Feature";
    f["geometry"] = {{"type", "Point"}, {"coordinates", {p.world_x, p.world_y}}};
    f["properties"] = {{"rank", i},
                       {"matrix_row", p.matrix_row},
                       {"grid_row", p.grid_row},
                       {"grid_col", p.grid_col},
                       {"world_x", p.world_x},
                       {"world_y", p.world_y}};
    doc["features"].push_back(std::move(f));
  }
  out << doc.dump(2) << '\n';
}

namespace {

nlohmann::ordered_json summary_json(const Summary& s) {
  return {{"mean", s.mean}, {"p5", s.p5}, {"median", s.median}, {"p95", s.p95}};
}

}  // namespace

std::string report_to_json(const EvaluationReport& report) {
  const BenchmarkProtocol& p = report.protocol;
  nlohmann::ordered_json doc;
  doc["schema"] = "soilmaxvol-evaluation/1";
  nlohmann::ordered_json methods = nlohmann::ordered_json::array();
  for (Method m : p.methods) methods.push_back(std::string(method_name(m)));
  doc["protocol"] = {{"k_min", p.k_min},
                     {"k_max", p.k_max},
                     {"methods", methods},
                     {"repetitions", p.repetitions},
                     {"clhs_iterations", p.clhs.iterations},
                     {"clhs_initial_temperature", p.clhs.initial_temperature},
                     {"clhs_cooling_factor", p.clhs.cooling_factor},
                     {"clhs_cooling_interval", p.clhs.cooling_interval},
                     {"clhs_weight_correlation", p.clhs.weight_correlation},
                     {"epsilon", p.epsilon},
                     {"seed", p.seed.value},
                     {"drop_coords", p.drop_coords},
                     {"record_timing", p.record_timing}};
  doc["n_pixels"] = report.n_pixels;
  doc["n_features"] = report.n_features;
  doc["n_classes"] = report.n_classes;
  doc["cells"] = nlohmann::ordered_json::array();
  for (const BenchmarkCell& cell : report.cells) {
    nlohmann::ordered_json c;
    c["method"] = std::string(method_name(cell.method));
    c["k"] = cell.k;
    c["runs"] = cell.runs;
    if (cell.error) {
      c["accuracy"] = nullptr;
      c["balanced_accuracy"] = nullptr;
    } else {
      c["accuracy"] = summary_json(cell.accuracy);
      c["balanced_accuracy"] = summary_json(cell.balanced_accuracy);
    }
    c["time_s"] = cell.time_s;
    c["error"] = cell.error ? nlohmann::ordered_json(*cell.error) : nlohmann::ordered_json(nullptr);
    doc["cells"].push_back(std::move(c));
  }
  return doc.dump(2) + "\n";
}

void write_plot_data_csv(std::ostream& out, const EvaluationReport& report) {
  out << "method,k,runs,acc_mean,acc_p5,acc_p95,bacc_mean,bacc_p5,bacc_p95,time_s\n";
  for (const BenchmarkCell& c : report.cells) {
    if (c.error) continue;
    out << method_name(c.method) << ',' << c.k << ',' << c.runs << ',' << exact(c.accuracy.mean) << ','
        << exact(c.accuracy.p5) << ',' << exact(c.accuracy.p95) << ',' << exact(c.balanced_accuracy.mean) << ','
        << exact(c.balanced_accuracy.p5) << ',' << exact(c.balanced_accuracy.p95) << ',' << exact(c.time_s)
        << '\n';
  }
}

}  // namespace soilmaxvol
