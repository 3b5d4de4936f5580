#include "svqvae/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace svqvae {

std::vector<std::size_t> Dataset::class_counts() const {
    std::vector<std::size_t> counts(num_classes(), 0);
    for (int label : labels) counts[static_cast<std::size_t>(label)]++;
    return counts;
}

void Dataset::validate() const {
    if (features.rows == 0 || features.cols == 0) {
        throw std::invalid_argument("dataset: empty feature matrix");
    }
    if (labels.size() != features.rows) {
        throw std::invalid_argument("dataset: " + std::to_string(labels.size()) + " labels for " +
                                    std::to_string(features.rows) + " rows");
    }
    if (class_names.empty()) throw std::invalid_argument("dataset: no classes");
    if (range_lo >= range_hi) {
        throw std::invalid_argument("dataset: declared range is not increasing");
    }
    const int y = static_cast<int>(class_names.size());
    for (int label : labels) {
        if (label < 0 || label >= y) {
            throw std::invalid_argument("dataset: label " + std::to_string(label) +
                                        " outside [0, " + std::to_string(y) + ")");
        }
    }
    for (double v : features.data) {
        if (!std::isfinite(v)) throw std::invalid_argument("dataset: non-finite feature value");
        if (v < range_lo || v > range_hi) {
            throw std::invalid_argument("dataset: feature value " + std::to_string(v) +
                                        " outside declared range");
        }
    }
}

namespace {

std::uint32_t read_be_u32(std::istream& in, const std::string& path, const char* what) {
    unsigned char buf[4];
    in.read(reinterpret_cast<char*>(buf), 4);
    if (!in) throw std::invalid_argument(path + ": truncated while reading " + what);
    return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
           (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

std::ifstream open_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open file: " + path);
    return in;
}

}  // namespace

Dataset load_mnist_idx(const std::string& images_path, const std::string& labels_path) {
    constexpr std::uint32_t kImagesMagic = 0x00000803;
    constexpr std::uint32_t kLabelsMagic = 0x00000801;

    std::ifstream img = open_binary(images_path);
    const std::uint32_t img_magic = read_be_u32(img, images_path, "magic");
    if (img_magic != kImagesMagic) {
        std::ostringstream msg;
        msg << images_path << ": bad image magic 0x" << std::hex << img_magic << " (expected 0x"
            << kImagesMagic << ")";
        throw std::invalid_argument(msg.str());
    }
    const std::uint32_t n = read_be_u32(img, images_path, "image count");
    const std::uint32_t h = read_be_u32(img, images_path, "image height");
    const std::uint32_t w = read_be_u32(img, images_path, "image width");
    if (n == 0 || h == 0 || w == 0) {
        throw std::invalid_argument(images_path + ": zero-sized image dimensions");
    }

    std::ifstream lab = open_binary(labels_path);
    const std::uint32_t lab_magic = read_be_u32(lab, labels_path, "magic");
    if (lab_magic != kLabelsMagic) {
        std::ostringstream msg;
        msg << labels_path << ": bad label magic 0x" << std::hex << lab_magic << " (expected 0x"
            << kLabelsMagic << ")";
        throw std::invalid_argument(msg.str());
    }
    const std::uint32_t n_labels = read_be_u32(lab, labels_path, "label count");
    if (n_labels != n) {
        throw std::invalid_argument("image/label count mismatch: " + std::to_string(n) +
                                    " images vs " + std::to_string(n_labels) + " labels");
    }

    const std::size_t pixels = std::size_t(h) * std::size_t(w);
    std::vector<unsigned char> img_bytes(std::size_t(n) * pixels);
    img.read(reinterpret_cast<char*>(img_bytes.data()), static_cast<std::streamsize>(img_bytes.size()));
    if (static_cast<std::size_t>(img.gcount()) != img_bytes.size()) {
        throw std::invalid_argument(images_path + ": truncated pixel payload (expected " +
                                    std::to_string(img_bytes.size()) + " bytes)");
    }
    std::vector<unsigned char> lab_bytes(n);
    lab.read(reinterpret_cast<char*>(lab_bytes.data()), static_cast<std::streamsize>(lab_bytes.size()));
    if (static_cast<std::size_t>(lab.gcount()) != lab_bytes.size()) {
        throw std::invalid_argument(labels_path + ": truncated label payload (expected " +
                                    std::to_string(lab_bytes.size()) + " bytes)");
    }

    Dataset ds;
    ds.features = Matrix(n, pixels);
    for (std::size_t i = 0; i < img_bytes.size(); ++i) {
        // p in [0,255] -> 2p/255 - 1 in [-1,1]
        ds.features.data[i] = 2.0 * static_cast<double>(img_bytes[i]) / 255.0 - 1.0;
    }
    ds.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (lab_bytes[i] > 9) {
            throw std::invalid_argument(labels_path + ": label byte " +
                                        std::to_string(int(lab_bytes[i])) + " outside 0..9");
        }
        ds.labels[i] = static_cast<int>(lab_bytes[i]);
    }
    for (int c = 0; c < 10; ++c) ds.class_names.push_back(std::to_string(c));
    ds.range_lo = -1.0;
    ds.range_hi = 1.0;
    ds.image_rows = h;
    ds.image_cols = w;
    ds.validate();
    return ds;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

double parse_cell(const std::string& cell, std::size_t line_no, const std::string& column) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(cell, &pos);
        if (pos != cell.size()) throw std::invalid_argument("trailing characters");
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("line " + std::to_string(line_no) + ", column '" + column +
                                    "': non-numeric cell '" + cell + "'");
    }
}

Dataset load_csv_impl(const std::string& path, const std::string& label_column, bool has_range,
                      double declared_lo, double declared_hi) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> header = split_csv_line(line);
    if (header.empty()) throw std::invalid_argument(path + ": empty header row");

    for (std::size_t i = 0; i < header.size(); ++i) {
        for (std::size_t j = i + 1; j < header.size(); ++j) {
            if (header[i] == header[j]) {
                throw std::invalid_argument(path + ": duplicate header name '" + header[i] + "'");
            }
        }
    }
    const auto label_it = std::find(header.begin(), header.end(), label_column);
    if (label_it == header.end()) {
        throw std::invalid_argument(path + ": label column '" + label_column + "' not found");
    }
    const std::size_t label_idx = static_cast<std::size_t>(label_it - header.begin());
    const std::size_t f = header.size() - 1;
    if (f == 0) throw std::invalid_argument(path + ": no feature columns besides the label");

    std::vector<double> values;
    std::vector<int> labels;
    std::vector<std::string> class_names;
    std::map<std::string, int> class_index;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            throw std::invalid_argument(path + ": line " + std::to_string(line_no) + " has " +
                                        std::to_string(cells.size()) + " cells, header has " +
                                        std::to_string(header.size()));
        }
        const std::string& label = cells[label_idx];
        if (label.empty()) {
            throw std::invalid_argument(path + ": line " + std::to_string(line_no) +
                                        ": missing label");
        }
        auto [it, inserted] = class_index.try_emplace(label, static_cast<int>(class_names.size()));
        if (inserted) class_names.push_back(label);
        labels.push_back(it->second);
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i == label_idx) continue;
            values.push_back(parse_cell(cells[i], line_no, header[i]));
        }
    }
    if (labels.empty()) throw std::invalid_argument(path + ": no data rows");

    Dataset ds;
    ds.features = Matrix(labels.size(), f);
    ds.features.data = std::move(values);
    ds.labels = std::move(labels);
    ds.class_names = std::move(class_names);
    if (has_range) {
        ds.range_lo = declared_lo;
        ds.range_hi = declared_hi;
    } else {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (double v : ds.features.data) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (lo == hi) {  // degenerate constant data still needs a proper interval
            lo -= 1.0;
            hi += 1.0;
        }
        ds.range_lo = lo;
        ds.range_hi = hi;
    }
    ds.validate();
    return ds;
}

}  // namespace

Dataset load_labeled_csv(const std::string& path, const std::string& label_column) {
    return load_csv_impl(path, label_column, false, 0.0, 0.0);
}

Dataset load_labeled_csv(const std::string& path, const std::string& label_column,
                         double declared_lo, double declared_hi) {
    return load_csv_impl(path, label_column, true, declared_lo, declared_hi);
}

namespace {

Dataset take_rows(const Dataset& ds, const std::vector<std::size_t>& rows) {
    Dataset out;
    out.features = Matrix(rows.size(), ds.feature_dim());
    out.labels.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double* src = ds.features.row_ptr(rows[i]);
        std::copy(src, src + ds.feature_dim(), out.features.row_ptr(i));
        out.labels.push_back(ds.labels[rows[i]]);
    }
    out.class_names = ds.class_names;
    out.range_lo = ds.range_lo;
    out.range_hi = ds.range_hi;
    out.image_rows = ds.image_rows;
    out.image_cols = ds.image_cols;
    return out;
}

}  // namespace

std::pair<Dataset, Dataset> stratified_split(const Dataset& ds, double train_fraction, Rng& rng) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw std::invalid_argument("stratified_split: fraction " +
                                    std::to_string(train_fraction) + " outside (0, 1)");
    }
    std::vector<std::vector<std::size_t>> per_class(ds.num_classes());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        per_class[static_cast<std::size_t>(ds.labels[i])].push_back(i);
    }
    std::vector<std::size_t> train_rows, test_rows;
    for (auto& members : per_class) {
        const std::size_t n = members.size();
        if (n == 0) continue;
        const std::vector<std::size_t> order = rng.permutation(n);
        std::size_t n_train = static_cast<std::size_t>(
            std::llround(train_fraction * static_cast<double>(n)));
        if (n >= 2) n_train = std::clamp<std::size_t>(n_train, 1, n - 0);
        n_train = std::min(n_train, n);
        for (std::size_t i = 0; i < n; ++i) {
            (i < n_train ? train_rows : test_rows).push_back(members[order[i]]);
        }
    }
    if (train_rows.empty() || test_rows.empty()) {
        throw std::invalid_argument("stratified_split: fraction " +
                                    std::to_string(train_fraction) +
                                    " left one side of the split empty");
    }
    return {take_rows(ds, train_rows), take_rows(ds, test_rows)};
}

Matrix rescale_output(const Matrix& y_hat, double lo, double hi) {
    if (lo >= hi) {
        throw std::invalid_argument("rescale_output: range [" + std::to_string(lo) + ", " +
                                    std::to_string(hi) + "] is not increasing");
    }
    Matrix out(y_hat.rows, y_hat.cols);
    const double half_span = 0.5 * (hi - lo);
    for (std::size_t i = 0; i < y_hat.data.size(); ++i) {
        out.data[i] = lo + (y_hat.data[i] + 1.0) * half_span;
    }
    return out;
}

Dataset make_blobs(Rng& rng, std::size_t classes, std::size_t dims, std::size_t per_class,
                   double center_spread, double noise_std) {
    if (classes == 0 || dims == 0 || per_class == 0) {
        throw std::invalid_argument("make_blobs: classes, dims and per_class must be positive");
    }
    Matrix centers(classes, dims);
    for (double& v : centers.data) v = center_spread * rng.next_gaussian();

    Dataset ds;
    ds.features = Matrix(classes * per_class, dims);
    ds.labels.resize(classes * per_class);
    std::size_t row = 0;
    for (std::size_t c = 0; c < classes; ++c) {
        for (std::size_t s = 0; s < per_class; ++s, ++row) {
            double* dst = ds.features.row_ptr(row);
            const double* mu = centers.row_ptr(c);
            for (std::size_t j = 0; j < dims; ++j) {
                dst[j] = mu[j] + noise_std * rng.next_gaussian();
            }
            ds.labels[row] = static_cast<int>(c);
        }
    }
    for (std::size_t c = 0; c < classes; ++c) ds.class_names.push_back("blob" + std::to_string(c));
    double lo = ds.features.data[0], hi = ds.features.data[0];
    for (double v : ds.features.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (lo == hi) {
        lo -= 1.0;
        hi += 1.0;
    }
    ds.range_lo = lo;
    ds.range_hi = hi;
    ds.validate();
    return ds;
}

}  // namespace svqvae
