#include "svqvae/numeric.hpp"

#include <cmath>
#include <stdexcept>

#include "svqvae/kernels.hpp"

namespace svqvae {

Activation activation_from_string(const std::string& name) {
    if (name == "linear") return Activation::linear;
    if (name == "relu") return Activation::relu;
    if (name == "tanh") return Activation::tanh;
    throw std::invalid_argument("unknown activation '" + name + "' (expected linear, relu, tanh)");
}

std::string activation_to_string(Activation a) {
    switch (a) {
        case Activation::linear: return "linear";
        case Activation::relu: return "relu";
        case Activation::tanh: return "tanh";
    }
    throw std::invalid_argument("invalid activation enum value");
}

Matrix activate(Activation kind, const Matrix& x, ActivationMode mode) {
    Matrix y(x.rows, x.cols);
    const bool deriv = mode == ActivationMode::derivative;
    for (std::size_t i = 0; i < x.data.size(); ++i) {
        const double v = x.data[i];
        switch (kind) {
            case Activation::linear:
                y.data[i] = deriv ? 1.0 : v;
                break;
            case Activation::relu:
                y.data[i] = deriv ? (v > 0.0 ? 1.0 : 0.0) : (v > 0.0 ? v : 0.0);
                break;
            case Activation::tanh: {
                const double t = std::tanh(v);
                y.data[i] = deriv ? 1.0 - t * t : t;
                break;
            }
        }
    }
    return y;
}

Matrix affine(const Matrix& x, const Matrix& w, const std::vector<double>& bias) {
    if (bias.size() != w.cols) {
        throw std::invalid_argument("affine: bias length " + std::to_string(bias.size()) +
                                    " does not match weight columns of " + shape_str(w));
    }
    Matrix y = kernels::matmul(x, w);
    for (std::size_t i = 0; i < y.rows; ++i) {
        double* row = y.row_ptr(i);
        for (std::size_t j = 0; j < y.cols; ++j) row[j] += bias[j];
    }
    return y;
}

double mse(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument("mse: shape mismatch: " + shape_str(a) + " vs " + shape_str(b));
    }
    if (a.data.empty()) throw std::invalid_argument("mse: empty matrices");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        sum += d * d;
    }
    return sum / static_cast<double>(a.data.size());
}

Matrix covariance(const Matrix& samples, CovarianceMode mode) {
    const std::size_t n = samples.rows;
    const std::size_t d = samples.cols;
    if (n == 0) throw std::invalid_argument("covariance: need at least one sample");

    std::vector<double> mean(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = samples.row_ptr(i);
        for (std::size_t j = 0; j < d; ++j) mean[j] += row[j];
    }
    for (double& m : mean) m /= static_cast<double>(n);

    if (mode == CovarianceMode::diagonal) {
        Matrix var(1, d);
        if (n == 1) return var;
        for (std::size_t i = 0; i < n; ++i) {
            const double* row = samples.row_ptr(i);
            for (std::size_t j = 0; j < d; ++j) {
                const double c = row[j] - mean[j];
                var(0, j) += c * c;
            }
        }
        for (std::size_t j = 0; j < d; ++j) var(0, j) /= static_cast<double>(n - 1);
        return var;
    }

    Matrix cov(d, d);
    if (n == 1) return cov;
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = samples.row_ptr(i);
        for (std::size_t a = 0; a < d; ++a) {
            const double ca = row[a] - mean[a];
            for (std::size_t b = a; b < d; ++b) {
                cov(a, b) += ca * (row[b] - mean[b]);
            }
        }
    }
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = a; b < d; ++b) {
            cov(a, b) /= static_cast<double>(n - 1);
            cov(b, a) = cov(a, b);
        }
    }
    return cov;
}

Matrix cholesky(const Matrix& s) {
    const std::size_t d = s.rows;
    if (s.rows != s.cols) {
        throw std::invalid_argument("cholesky: matrix is not square: " + shape_str(s));
    }
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i + 1; j < d; ++j) {
            if (s(i, j) != s(j, i)) {
                throw std::invalid_argument("cholesky: matrix is not symmetric at (" +
                                            std::to_string(i) + "," + std::to_string(j) + ")");
            }
        }
    }
    Matrix l(d, d);
    for (std::size_t j = 0; j < d; ++j) {
        double diag = s(j, j);
        for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
        if (diag <= 0.0) {
            throw std::invalid_argument(
                "cholesky: matrix is not positive definite (pivot " + std::to_string(j) +
                "); add diagonal jitter or use diagonal covariance mode");
        }
        l(j, j) = std::sqrt(diag);
        for (std::size_t i = j + 1; i < d; ++i) {
            double sum = s(i, j);
            for (std::size_t k = 0; k < j; ++k) sum -= l(i, k) * l(j, k);
            l(i, j) = sum / l(j, j);
        }
    }
    return l;
}

std::vector<double> finite_diff_grad(const std::function<double(const std::vector<double>&)>& f,
                                     const std::vector<double>& p, double eps) {
    if (eps <= 0.0) throw std::invalid_argument("finite_diff_grad: eps must be positive");
    std::vector<double> grad(p.size());
    std::vector<double> work = p;
    for (std::size_t i = 0; i < p.size(); ++i) {
        work[i] = p[i] + eps;
        const double hi = f(work);
        work[i] = p[i] - eps;
        const double lo = f(work);
        work[i] = p[i];
        grad[i] = (hi - lo) / (2.0 * eps);
    }
    return grad;
}

std::vector<double> gaussian_sample(Rng& rng, const std::vector<double>& mean,
                                    const Matrix& scale) {
    const std::size_t d = mean.size();
    std::vector<double> out(mean);
    if (scale.rows == 1 && scale.cols == d) {
        for (std::size_t j = 0; j < d; ++j) out[j] += scale(0, j) * rng.next_gaussian();
        return out;
    }
    if (scale.rows == d && scale.cols == d) {
        std::vector<double> u(d);
        for (double& v : u) v = rng.next_gaussian();
        for (std::size_t i = 0; i < d; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j <= i; ++j) acc += scale(i, j) * u[j];
            out[i] += acc;
        }
        return out;
    }
    throw std::invalid_argument("gaussian_sample: scale " + shape_str(scale) +
                                " matches neither 1x" + std::to_string(d) + " stddev nor " +
                                std::to_string(d) + "x" + std::to_string(d) + " factor");
}

}  // namespace svqvae
