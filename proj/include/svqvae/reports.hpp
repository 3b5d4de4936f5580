#pragma once

#include <string>
#include <vector>

#include "svqvae/analysis.hpp"
#include "svqvae/louvain.hpp"
#include "svqvae/matrix.hpp"

namespace svqvae {

// names label both the header row and the leading column
void write_distances_csv(const Matrix& distance_matrix, const std::vector<std::string>& names,
                         const std::string& path);

void write_confusion_csv(const Matrix& confusion, const std::vector<std::string>& class_names,
                         const std::vector<std::string>& code_names, const std::string& path);

void write_report_json(const AnalysisReport& report, const std::vector<std::string>& class_names,
                       const std::string& path);

void write_graph_dot(const PartnerGraph& graph, const std::string& path);

void write_graph_json(const PartnerGraph& graph, const std::vector<int>& communities,
                      double modularity_score, const std::string& path);

// binary 8-bit PGM (P5); values map [lo, hi] -> [0, 255], clamped
void write_pgm(const std::vector<double>& row, std::size_t height, std::size_t width,
               double lo, double hi, const std::string& path);

// rows of a matrix as CSV with an optional leading label column
void write_samples_csv(const Matrix& rows, const std::vector<std::string>& row_labels,
                       const std::string& label_header, const std::string& path);

std::string sanitize_filename(const std::string& name);

}  // namespace svqvae
