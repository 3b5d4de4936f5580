#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "svqvae/matrix.hpp"
#include "svqvae/rng.hpp"

namespace svqvae {

struct Dataset {
    Matrix features;                       // N x F
    std::vector<int> labels;               // class indices in [0, Y)
    std::vector<std::string> class_names;  // size Y
    double range_lo = -1.0;
    double range_hi = 1.0;
    std::size_t image_rows = 0;  // nonzero when rows are flattened images
    std::size_t image_cols = 0;

    std::size_t size() const { return features.rows; }
    std::size_t feature_dim() const { return features.cols; }
    std::size_t num_classes() const { return class_names.size(); }
    std::vector<std::size_t> class_counts() const;

    // checks label bounds, finiteness, value range, nonemptiness
    void validate() const;
};

// Big-endian IDX pair: images magic 0x00000803 with dims (N, H, W), labels
// magic 0x00000801 with dim (N). Pixels p in [0,255] map to 2p/255 - 1.
Dataset load_mnist_idx(const std::string& images_path, const std::string& labels_path);

// Header row required; label column selects classes (mapped to indices by
// first appearance); all other columns must be numeric. The declared range
// defaults to the observed min/max unless a range is supplied.
Dataset load_labeled_csv(const std::string& path, const std::string& label_column);
Dataset load_labeled_csv(const std::string& path, const std::string& label_column,
                         double declared_lo, double declared_hi);

// Per-class shuffle then split. Every class with at least two samples keeps
// at least one in train; proportions hold within one sample per class.
std::pair<Dataset, Dataset> stratified_split(const Dataset& ds, double train_fraction, Rng& rng);

// Affine map of [-1, 1] onto [lo, hi].
Matrix rescale_output(const Matrix& y_hat, double lo, double hi);

// Gaussian blobs: class c sampled from N(mu_c, noise_std^2 I) with mu_c drawn
// once from N(0, center_spread^2 I). value_range is the observed min/max.
Dataset make_blobs(Rng& rng, std::size_t classes, std::size_t dims, std::size_t per_class,
                   double center_spread, double noise_std);

}  // namespace svqvae
