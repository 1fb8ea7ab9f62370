#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "soilmaxvol/error.hpp"
#include "soilmaxvol/evaluation.hpp"
#include "soilmaxvol/io.hpp"
#include "soilmaxvol/maxvol.hpp"
#include "soilmaxvol/raster.hpp"
#include "soilmaxvol/samplers.hpp"
#include "soilmaxvol/synth.hpp"
#include "soilmaxvol/terrain.hpp"

namespace py = pybind11;
using namespace soilmaxvol;

namespace {

py::array_t<double> grid_array(const RasterGrid& g) {
  py::array_t<double> out({g.nrows(), g.ncols()});
  std::copy(g.values().begin(), g.values().end(), out.mutable_data());
  return out;
}

RasterGrid grid_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& values,
                           double xll, double yll, double cellsize, double nodata) {
  if (values.ndim() != 2) throw InvalidArgument("raster values must be 2-D");
  GridGeometry g{static_cast<std::size_t>(values.shape(0)), static_cast<std::size_t>(values.shape(1)), xll, yll,
                 cellsize};
  return RasterGrid(g, nodata, std::vector<double>(values.data(), values.data() + values.size()));
}

py::dict layers_dict(const TerrainLayers& t) {
  py::dict d;
  for (const NamedLayer& layer : named_layers(t)) d[py::str(layer.name)] = layer.grid;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Maximum-volume soil sampling designs from gridded terrain";

  static py::exception<Error> base_error(m, "Error", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const InvalidArgument& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const Error& e) {
      PyErr_SetString(base_error.ptr(), e.what());
    }
  });

  // --- rasters ---------------------------------------------------------------

  py::class_<RasterGrid>(m, "RasterGrid")
      .def(py::init(&grid_from_array), py::arg("values"), py::arg("xllcorner") = 0.0, py::arg("yllcorner") = 0.0,
           py::arg("cellsize") = 1.0, py::arg("nodata") = RasterGrid::kDefaultNodata)
      .def_property_readonly("values", &grid_array)
      .def_property_readonly("nrows", &RasterGrid::nrows)
      .def_property_readonly("ncols", &RasterGrid::ncols)
      .def_property_readonly("cellsize", &RasterGrid::cellsize)
      .def_property_readonly("nodata", &RasterGrid::nodata_value)
      .def_property_readonly("xllcorner", [](const RasterGrid& g) { return g.geometry().xllcorner; })
      .def_property_readonly("yllcorner", [](const RasterGrid& g) { return g.geometry().yllcorner; })
      .def("cell_center", [](const RasterGrid& g, std::size_t r, std::size_t c) { return cell_to_world(g, r, c); })
      .def(py::self == py::self)
      .def("__repr__", [](const RasterGrid& g) {
        std::ostringstream s;
        s << "<RasterGrid " << g.nrows() << "x" << g.ncols() << " cellsize=" << g.cellsize() << ">";
        return s.str();
      });

  m.def("read_asc", &read_asc_file, py::arg("path"));
  m.def("write_asc", &write_asc_file, py::arg("path"), py::arg("grid"), py::arg("precision") = 6);

  // --- maxvol ----------------------------------------------------------------

  py::class_<MaxvolResult>(m, "MaxvolResult")
      .def_readonly("selected", &MaxvolResult::selected)
      .def_readonly("coefficients", &MaxvolResult::coefficients)
      .def_readonly("volume", &MaxvolResult::volume)
      .def_readonly("swaps", &MaxvolResult::swaps)
      .def_readonly("converged", &MaxvolResult::converged)
      .def_readonly("volume_trace", &MaxvolResult::volume_trace);

  m.def(
      "maxvol_square",
      [](const Matrix& a, double tol, std::optional<std::size_t> max_swaps) {
        MaxvolOptions opts;
        opts.tol = tol;
        opts.max_swaps = max_swaps;
        return maxvol_square(a, opts);
      },
      py::arg("a"), py::arg("tol") = 1.05, py::arg("max_swaps") = py::none());
  m.def(
      "maxvol_rect",
      [](const Matrix& a, std::size_t k, double tol) {
        MaxvolOptions opts;
        opts.tol = tol;
        return maxvol_rect(a, k, opts);
      },
      py::arg("a"), py::arg("k"), py::arg("tol") = 1.05);
  m.def("vol_square", &vol_square, py::arg("m"));
  m.def("vol_rect", &vol_rect, py::arg("m"));

  // --- terrain ---------------------------------------------------------------

  m.def(
      "derive_terrain",
      [](const RasterGrid& dem, double min_tan_slope) { return layers_dict(derive_terrain(dem, min_tan_slope)); },
      py::arg("dem"), py::arg("min_tan_slope") = 0.001,
      "Slope, aspect, depressions, accumulation and twi layers keyed by name.");

  py::class_<FeatureMatrix>(m, "FeatureMatrix")
      .def_readonly("matrix", &FeatureMatrix::matrix)
      .def_readonly("pixel_index", &FeatureMatrix::pixel_index)
      .def_readonly("feature_names", &FeatureMatrix::feature_names)
      .def_readonly("warnings", &FeatureMatrix::warnings)
      .def_property_readonly("shape", [](const FeatureMatrix& fm) { return py::make_tuple(fm.rows(), fm.cols()); })
      .def("denormalize", &FeatureMatrix::denormalize, py::arg("col"), py::arg("value"))
      .def("drop_coordinates", &drop_coordinates);

  m.def(
      "build_feature_matrix",
      [](const RasterGrid& dem, double min_tan_slope) {
        return build_feature_matrix(named_layers(derive_terrain(dem, min_tan_slope)), dem);
      },
      py::arg("dem"), py::arg("min_tan_slope") = 0.001);
  m.def("read_feature_matrix", &read_feature_matrix_file, py::arg("path"));
  m.def("write_feature_matrix", &write_feature_matrix_file, py::arg("path"), py::arg("fm"));

  // --- samplers --------------------------------------------------------------

  py::class_<ClhsOptions>(m, "ClhsOptions")
      .def(py::init<>())
      .def_readwrite("iterations", &ClhsOptions::iterations)
      .def_readwrite("initial_temperature", &ClhsOptions::initial_temperature)
      .def_readwrite("cooling_factor", &ClhsOptions::cooling_factor)
      .def_readwrite("cooling_interval", &ClhsOptions::cooling_interval)
      .def_readwrite("weight_strata", &ClhsOptions::weight_strata)
      .def_readwrite("weight_correlation", &ClhsOptions::weight_correlation);

  py::class_<SampleDesign>(m, "SampleDesign")
      .def_property_readonly("rows", &SampleDesign::rows)
      .def_property_readonly("method", [](const SampleDesign& d) { return std::string(method_name(d.method)); })
      .def_readonly("k", &SampleDesign::k)
      .def_readonly("epsilon", &SampleDesign::epsilon)
      .def_property_readonly("cells",
                             [](const SampleDesign& d) {
                               std::vector<std::pair<std::size_t, std::size_t>> out;
                               for (const SamplePoint& p : d.points) out.emplace_back(p.grid_row, p.grid_col);
                               return out;
                             })
      .def_property_readonly("world", [](const SampleDesign& d) {
        std::vector<std::pair<double, double>> out;
        for (const SamplePoint& p : d.points) out.emplace_back(p.world_x, p.world_y);
        return out;
      });

  m.def(
      "sample",
      [](const FeatureMatrix& fm, const std::string& method, std::size_t k, double epsilon, std::uint64_t seed,
         const ClhsOptions& clhs) {
        switch (parse_method(method)) {
          case Method::Maxvol: return sample_maxvol(fm, k, epsilon);
          case Method::Random: return sample_random(fm, k, RngSeed{seed});
          case Method::KennardStone: return sample_kennard_stone(fm, k);
          case Method::Clhs: return sample_clhs(fm, k, clhs, RngSeed{seed});
        }
        throw InvalidArgument("unknown method");
      },
      py::arg("fm"), py::arg("method"), py::arg("k"), py::arg("epsilon") = 0.0, py::arg("seed") = 42,
      py::arg("clhs") = ClhsOptions{});
  m.def("kennard_stone_order", &kennard_stone_order, py::arg("x"), py::arg("k"));

  // --- evaluation ------------------------------------------------------------

  py::class_<NaiveBayesModel>(m, "NaiveBayesModel")
      .def_readonly("classes", &NaiveBayesModel::classes)
      .def_readonly("priors", &NaiveBayesModel::priors)
      .def_readonly("means", &NaiveBayesModel::means)
      .def_readonly("variances", &NaiveBayesModel::variances)
      .def_readonly("variance_floor", &NaiveBayesModel::variance_floor);

  m.def(
      "nb_fit", [](const Matrix& x, const std::vector<int>& y) { return nb_fit(x, y); }, py::arg("x"),
      py::arg("y"));
  m.def("nb_predict", &nb_predict, py::arg("model"), py::arg("x"));
  m.def(
      "accuracy", [](const std::vector<int>& y, const std::vector<int>& p) { return accuracy(y, p); },
      py::arg("y"), py::arg("y_hat"));
  m.def(
      "balanced_accuracy",
      [](const std::vector<int>& y, const std::vector<int>& p) { return balanced_accuracy(y, p); }, py::arg("y"),
      py::arg("y_hat"));

  py::class_<BenchmarkProtocol>(m, "BenchmarkProtocol")
      .def(py::init<>())
      .def_readwrite("k_min", &BenchmarkProtocol::k_min)
      .def_readwrite("k_max", &BenchmarkProtocol::k_max)
      .def_readwrite("repetitions", &BenchmarkProtocol::repetitions)
      .def_readwrite("clhs", &BenchmarkProtocol::clhs)
      .def_readwrite("epsilon", &BenchmarkProtocol::epsilon)
      .def_readwrite("drop_coords", &BenchmarkProtocol::drop_coords)
      .def_readwrite("record_timing", &BenchmarkProtocol::record_timing)
      .def_property(
          "seed", [](const BenchmarkProtocol& p) { return p.seed.value; },
          [](BenchmarkProtocol& p, std::uint64_t v) { p.seed = RngSeed{v}; })
      .def_property(
          "methods",
          [](const BenchmarkProtocol& p) {
            std::vector<std::string> out;
            for (Method mth : p.methods) out.emplace_back(method_name(mth));
            return out;
          },
          [](BenchmarkProtocol& p, const std::vector<std::string>& names) {
            p.methods.clear();
            for (const std::string& n : names) p.methods.push_back(parse_method(n));
          });

  m.def(
      "run_benchmark",
      [](const FeatureMatrix& fm, const RasterGrid& classes, const BenchmarkProtocol& protocol) {
        const EvaluationReport report = run_benchmark(fm, ClassMap::from_grid(classes), protocol);
        return py::module_::import("json").attr("loads")(report_to_json(report));
      },
      py::arg("fm"), py::arg("classes"), py::arg("protocol") = BenchmarkProtocol{},
      "Runs the benchmark and returns the report as a dict.");

  // --- synthetic sites -------------------------------------------------------

  py::class_<SiteSpec>(m, "SiteSpec")
      .def(py::init(&SiteSpec::default_spec))
      .def_static("from_json", &site_spec_from_json, py::arg("text"))
      .def("to_json", &site_spec_to_json)
      .def_readwrite("nrows", &SiteSpec::nrows)
      .def_readwrite("ncols", &SiteSpec::ncols)
      .def_readwrite("cellsize", &SiteSpec::cellsize)
      .def_readwrite("noise_amplitude", &SiteSpec::noise_amplitude)
      .def_property(
          "seed", [](const SiteSpec& s) { return s.seed.value; },
          [](SiteSpec& s, std::uint64_t v) { s.seed = RngSeed{v}; });

  m.def(
      "generate_site",
      [](const SiteSpec& spec) {
        Site site = generate_site(spec);
        return py::make_tuple(site.dem, site.reference.grid);
      },
      py::arg("spec") = SiteSpec::default_spec(), "Returns (dem, classes).");
}
