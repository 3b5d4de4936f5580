#pragma once

#include <string>
#include <vector>

#include "svqvae/dataset.hpp"
#include "svqvae/model.hpp"

namespace svqvae {

// exp of the entropy of empirical code-usage frequencies; 1 when a single
// code absorbs everything, num_codes when usage is exactly uniform
double perplexity(const std::vector<int>& assignments, std::size_t num_codes);

struct AnalysisReport {
    double perplexity = 0.0;
    double mse = 0.0;       // in the dataset's declared value range
    double accuracy = 0.0;  // fraction with nearest code == label
    Matrix confusion;       // classes x codes counts, row = true class
    Matrix distance_matrix; // codes x codes Euclidean distances
};

// Evaluation-phase forward over the whole dataset (nearest-code routing).
AnalysisReport evaluate(const Model& model, const Dataset& ds);

Matrix code_distance_matrix(const Matrix& embedding);

// decoder output for every embedding code, one prototype row per code
Matrix decode_codes(const Model& model);

struct ClassMeanOracle {
    Matrix class_means;      // Y x F train means in data space
    double lower_bound_mse;  // eval MSE of the per-class train-mean predictor
};

// The MSE-optimal single reconstruction per class is the class mean; this is
// the architecture-independent floor used by the acceptance checks.
ClassMeanOracle class_mean_oracle(const Dataset& train_ds, const Dataset& eval_ds);

struct PartnerEdge {
    int source = 0;
    int target = 0;
    double distance = 0.0;
};

struct PartnerGraph {
    std::vector<std::string> names;
    std::vector<PartnerEdge> edges;  // exactly one outgoing edge per node
};

// one edge per code to its nearest other code, lowest-index tie-break
PartnerGraph nearest_partner_graph(const Matrix& distance_matrix,
                                   const std::vector<std::string>& names);

}  // namespace svqvae
