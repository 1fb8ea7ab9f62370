#pragma once

// File formats shared by the CLI and the Python bindings.
//
// Feature matrix file (comma-separated text):
//   # soilmaxvol-features 1
//   # grid <ncols> <nrows> <xllcorner> <yllcorner> <cellsize>
//   # norm <name> <min> <max> <degenerate 0|1>      (one per feature column)
//   <feature names...>,grid_row,grid_col
//   <n normalised values>,<grid_row>,<grid_col>     (m rows)
// Lines starting with '#' are metadata; the first other line is the header.

#include <iosfwd>
#include <string>

#include "soilmaxvol/evaluation.hpp"
#include "soilmaxvol/samplers.hpp"
#include "soilmaxvol/terrain.hpp"

namespace soilmaxvol {

void write_feature_matrix(std::ostream& out, const FeatureMatrix& fm);
FeatureMatrix read_feature_matrix(std::istream& in);
void write_feature_matrix_file(const std::string& path, const FeatureMatrix& fm);
FeatureMatrix read_feature_matrix_file(const std::string& path);

/// rank,matrix_row,grid_row,grid_col,world_x,world_y
void write_design_csv(std::ostream& out, const SampleDesign& design);
/// FeatureCollection of Point features carrying the CSV columns as properties.
void write_design_geojson(std::ostream& out, const SampleDesign& design);

/// JSON document:
///   {"schema": "soilmaxvol-evaluation/1",
///    "protocol": {...}, "n_pixels", "n_features", "n_classes",
///    "cells": [{"method", "k", "runs",
///               "accuracy": {"mean","p5","median","p95"},
///               "balanced_accuracy": {...}, "time_s", "error"}]}
/// time_s is the wall time spent producing the designs of the cell.
std::string report_to_json(const EvaluationReport& report);

/// method,k,runs,acc_mean,acc_p5,acc_p95,bacc_mean,bacc_p5,bacc_p95,time_s
void write_plot_data_csv(std::ostream& out, const EvaluationReport& report);

}  // namespace soilmaxvol
