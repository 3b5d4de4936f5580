#include "svqvae/analysis.hpp"

#include <cmath>
#include <stdexcept>

namespace svqvae {

double perplexity(const std::vector<int>& assignments, std::size_t num_codes) {
    if (assignments.empty()) throw std::invalid_argument("perplexity: empty assignments");
    std::vector<double> counts(num_codes, 0.0);
    for (int a : assignments) {
        if (a < 0 || static_cast<std::size_t>(a) >= num_codes) {
            throw std::invalid_argument("perplexity: assignment " + std::to_string(a) +
                                        " outside [0, " + std::to_string(num_codes) + ")");
        }
        counts[static_cast<std::size_t>(a)] += 1.0;
    }
    const double n = static_cast<double>(assignments.size());
    double entropy = 0.0;
    for (double c : counts) {
        if (c == 0.0) continue;
        const double p = c / n;
        entropy -= p * std::log(p);
    }
    return std::exp(entropy);
}

AnalysisReport evaluate(const Model& model, const Dataset& ds) {
    ds.validate();
    if (ds.feature_dim() != model.config.input_dim) {
        throw std::invalid_argument("evaluate: dataset has " + std::to_string(ds.feature_dim()) +
                                    " features, model expects " +
                                    std::to_string(model.config.input_dim));
    }
    if (model.config.variant == Variant::supervised &&
        ds.num_classes() != model.config.num_codes) {
        throw std::invalid_argument("evaluate: dataset has " + std::to_string(ds.num_classes()) +
                                    " classes but the supervised model has " +
                                    std::to_string(model.config.num_codes) + " codes");
    }

    const Matrix z_e = encode(model, ds.features);
    const std::vector<int> nearest = nearest_code(model.embedding, z_e);
    Matrix z_q(ds.size(), model.config.code_dim);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const double* src = model.embedding.row_ptr(static_cast<std::size_t>(nearest[i]));
        std::copy(src, src + model.config.code_dim, z_q.row_ptr(i));
    }
    const Matrix x_hat = decode(model, z_q);

    AnalysisReport report;
    report.mse = mse(ds.features, x_hat);
    report.perplexity = perplexity(nearest, model.embedding.rows);
    report.confusion = Matrix(ds.num_classes(), model.embedding.rows);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        report.confusion(static_cast<std::size_t>(ds.labels[i]),
                         static_cast<std::size_t>(nearest[i])) += 1.0;
        if (nearest[i] == ds.labels[i]) ++hits;
    }
    report.accuracy = static_cast<double>(hits) / static_cast<double>(ds.size());
    report.distance_matrix = code_distance_matrix(model.embedding);
    return report;
}

Matrix code_distance_matrix(const Matrix& embedding) {
    const std::size_t y = embedding.rows;
    Matrix dist(y, y);
    for (std::size_t i = 0; i < y; ++i) {
        for (std::size_t j = i + 1; j < y; ++j) {
            double acc = 0.0;
            const double* a = embedding.row_ptr(i);
            const double* b = embedding.row_ptr(j);
            for (std::size_t k = 0; k < embedding.cols; ++k) {
                const double d = a[k] - b[k];
                acc += d * d;
            }
            const double d = std::sqrt(acc);
            dist(i, j) = d;
            dist(j, i) = d;
        }
    }
    return dist;
}

Matrix decode_codes(const Model& model) {
    return decode(model, model.embedding);
}

ClassMeanOracle class_mean_oracle(const Dataset& train_ds, const Dataset& eval_ds) {
    if (train_ds.feature_dim() != eval_ds.feature_dim()) {
        throw std::invalid_argument("class_mean_oracle: feature dims differ");
    }
    const std::size_t y = train_ds.num_classes();
    const std::size_t f = train_ds.feature_dim();

    ClassMeanOracle oracle;
    oracle.class_means = Matrix(y, f);
    std::vector<std::size_t> counts(y, 0);
    for (std::size_t i = 0; i < train_ds.size(); ++i) {
        const auto c = static_cast<std::size_t>(train_ds.labels[i]);
        counts[c]++;
        const double* src = train_ds.features.row_ptr(i);
        double* dst = oracle.class_means.row_ptr(c);
        for (std::size_t j = 0; j < f; ++j) dst[j] += src[j];
    }
    for (std::size_t c = 0; c < y; ++c) {
        if (counts[c] == 0) continue;
        double* dst = oracle.class_means.row_ptr(c);
        for (std::size_t j = 0; j < f; ++j) dst[j] /= static_cast<double>(counts[c]);
    }

    double sum = 0.0;
    for (std::size_t i = 0; i < eval_ds.size(); ++i) {
        const auto c = static_cast<std::size_t>(eval_ds.labels[i]);
        if (c >= y || counts[c] == 0) {
            throw std::invalid_argument("class_mean_oracle: eval class '" +
                                        eval_ds.class_names[c] + "' unseen in train data");
        }
        const double* xs = eval_ds.features.row_ptr(i);
        const double* mu = oracle.class_means.row_ptr(c);
        double acc = 0.0;
        for (std::size_t j = 0; j < f; ++j) {
            const double d = xs[j] - mu[j];
            acc += d * d;
        }
        sum += acc / static_cast<double>(f);
    }
    oracle.lower_bound_mse = sum / static_cast<double>(eval_ds.size());
    return oracle;
}

PartnerGraph nearest_partner_graph(const Matrix& distance_matrix,
                                   const std::vector<std::string>& names) {
    const std::size_t y = distance_matrix.rows;
    if (y < 2) throw std::invalid_argument("nearest_partner_graph: need at least 2 nodes");
    if (distance_matrix.cols != y || names.size() != y) {
        throw std::invalid_argument("nearest_partner_graph: matrix " + shape_str(distance_matrix) +
                                    " and " + std::to_string(names.size()) +
                                    " names are inconsistent");
    }
    PartnerGraph graph;
    graph.names = names;
    for (std::size_t i = 0; i < y; ++i) {
        std::size_t best = i == 0 ? 1 : 0;
        for (std::size_t j = 0; j < y; ++j) {
            if (j == i) continue;
            if (distance_matrix(i, j) < distance_matrix(i, best)) best = j;
        }
        graph.edges.push_back(
            {static_cast<int>(i), static_cast<int>(best), distance_matrix(i, best)});
    }
    return graph;
}

}  // namespace svqvae
