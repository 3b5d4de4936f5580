#include "svqvae/reports.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace svqvae {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    return out;
}

std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string quoted = "\"";
    for (char c : field) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

}  // namespace

void write_distances_csv(const Matrix& distance_matrix, const std::vector<std::string>& names,
                         const std::string& path) {
    if (distance_matrix.rows != names.size() || distance_matrix.cols != names.size()) {
        throw std::invalid_argument("write_distances_csv: matrix " + shape_str(distance_matrix) +
                                    " vs " + std::to_string(names.size()) + " names");
    }
    auto out = open_out(path);
    out.precision(17);
    out << "code";
    for (const auto& name : names) out << ',' << csv_quote(name);
    out << '\n';
    for (std::size_t i = 0; i < distance_matrix.rows; ++i) {
        out << csv_quote(names[i]);
        for (std::size_t j = 0; j < distance_matrix.cols; ++j) out << ',' << distance_matrix(i, j);
        out << '\n';
    }
}

void write_confusion_csv(const Matrix& confusion, const std::vector<std::string>& class_names,
                         const std::vector<std::string>& code_names, const std::string& path) {
    if (confusion.rows != class_names.size() || confusion.cols != code_names.size()) {
        throw std::invalid_argument("write_confusion_csv: matrix " + shape_str(confusion) +
                                    " vs " + std::to_string(class_names.size()) + " classes and " +
                                    std::to_string(code_names.size()) + " codes");
    }
    auto out = open_out(path);
    out << "class";
    for (const auto& name : code_names) out << ',' << csv_quote(name);
    out << '\n';
    for (std::size_t i = 0; i < confusion.rows; ++i) {
        out << csv_quote(class_names[i]);
        for (std::size_t j = 0; j < confusion.cols; ++j) {
            out << ',' << static_cast<long long>(confusion(i, j));
        }
        out << '\n';
    }
}

void write_report_json(const AnalysisReport& report, const std::vector<std::string>& class_names,
                       const std::string& path) {
    nlohmann::json doc;
    doc["perplexity"] = report.perplexity;
    doc["mse"] = report.mse;
    doc["accuracy"] = report.accuracy;
    doc["class_names"] = class_names;
    nlohmann::json confusion = nlohmann::json::array();
    for (std::size_t i = 0; i < report.confusion.rows; ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t j = 0; j < report.confusion.cols; ++j) {
            row.push_back(static_cast<long long>(report.confusion(i, j)));
        }
        confusion.push_back(std::move(row));
    }
    doc["confusion"] = std::move(confusion);
    auto out = open_out(path);
    out << doc.dump(1) << '\n';
}

namespace {

std::string dot_escape(const std::string& name) {
    std::string escaped;
    for (char c : name) {
        if (c == '"' || c == '\\') escaped += '\\';
        escaped += c;
    }
    return escaped;
}

}  // namespace

void write_graph_dot(const PartnerGraph& graph, const std::string& path) {
    auto out = open_out(path);
    out.precision(17);
    out << "digraph nearest_partners {\n";
    for (const auto& name : graph.names) {
        out << "  \"" << dot_escape(name) << "\";\n";
    }
    for (const auto& edge : graph.edges) {
        out << "  \"" << dot_escape(graph.names[static_cast<std::size_t>(edge.source)]) << "\" -> \""
            << dot_escape(graph.names[static_cast<std::size_t>(edge.target)]) << "\" [dist="
            << edge.distance << "];\n";
    }
    out << "}\n";
}

void write_graph_json(const PartnerGraph& graph, const std::vector<int>& communities,
                      double modularity_score, const std::string& path) {
    if (communities.size() != graph.names.size()) {
        throw std::invalid_argument("write_graph_json: " + std::to_string(communities.size()) +
                                    " communities for " + std::to_string(graph.names.size()) +
                                    " nodes");
    }
    nlohmann::json doc;
    nlohmann::json nodes = nlohmann::json::array();
    for (std::size_t i = 0; i < graph.names.size(); ++i) {
        nodes.push_back({{"name", graph.names[i]}, {"community", communities[i]}});
    }
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& edge : graph.edges) {
        edges.push_back({{"source", edge.source}, {"target", edge.target}, {"dist", edge.distance}});
    }
    doc["nodes"] = std::move(nodes);
    doc["edges"] = std::move(edges);
    doc["modularity"] = modularity_score;
    auto out = open_out(path);
    out << doc.dump(1) << '\n';
}

void write_pgm(const std::vector<double>& row, std::size_t height, std::size_t width,
               double lo, double hi, const std::string& path) {
    if (row.size() != height * width) {
        throw std::invalid_argument("write_pgm: " + std::to_string(row.size()) + " values for " +
                                    std::to_string(height) + "x" + std::to_string(width));
    }
    if (lo >= hi) throw std::invalid_argument("write_pgm: range is not increasing");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << "P5\n" << width << ' ' << height << "\n255\n";
    for (double v : row) {
        const double unit = (v - lo) / (hi - lo);
        const double scaled = std::clamp(unit, 0.0, 1.0) * 255.0;
        out.put(static_cast<char>(static_cast<unsigned char>(std::lround(scaled))));
    }
}

void write_samples_csv(const Matrix& rows, const std::vector<std::string>& row_labels,
                       const std::string& label_header, const std::string& path) {
    if (!row_labels.empty() && row_labels.size() != rows.rows) {
        throw std::invalid_argument("write_samples_csv: " + std::to_string(row_labels.size()) +
                                    " labels for " + std::to_string(rows.rows) + " rows");
    }
    auto out = open_out(path);
    out.precision(17);
    if (!row_labels.empty()) out << csv_quote(label_header);
    for (std::size_t j = 0; j < rows.cols; ++j) {
        if (j > 0 || !row_labels.empty()) out << ',';
        out << 'f' << j;
    }
    out << '\n';
    for (std::size_t i = 0; i < rows.rows; ++i) {
        if (!row_labels.empty()) out << csv_quote(row_labels[i]);
        for (std::size_t j = 0; j < rows.cols; ++j) {
            if (j > 0 || !row_labels.empty()) out << ',';
            out << rows(i, j);
        }
        out << '\n';
    }
}

std::string sanitize_filename(const std::string& name) {
    std::string safe;
    for (char c : name) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '-' || c == '.';
        safe += ok ? c : '_';
    }
    if (safe.empty()) safe = "unnamed";
    return safe;
}

}  // namespace svqvae
