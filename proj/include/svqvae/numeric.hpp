#pragma once

#include <functional>
#include <string>
#include <vector>

#include "svqvae/matrix.hpp"
#include "svqvae/rng.hpp"

namespace svqvae {

enum class Activation { linear, relu, tanh };

enum class ActivationMode { value, derivative };

Activation activation_from_string(const std::string& name);
std::string activation_to_string(Activation a);

// element-wise activation; derivative mode returns d(act)/dx evaluated at x.
// relu derivative at exactly 0 is taken as 0.
Matrix activate(Activation kind, const Matrix& x, ActivationMode mode);

// x (B x n) * w (n x m) + bias broadcast over rows -> B x m
Matrix affine(const Matrix& x, const Matrix& w, const std::vector<double>& bias);

// mean over all elements of (a - b)^2
double mse(const Matrix& a, const Matrix& b);

enum class CovarianceMode { diagonal, full };

// Unbiased covariance (divide by N-1) of the rows of samples; a single row
// yields zero covariance. diagonal mode returns a 1 x D matrix of variances,
// full mode the D x D matrix.
Matrix covariance(const Matrix& samples, CovarianceMode mode);

// Lower-triangular L with L*L^T = s. Throws if s is not symmetric or not
// positive definite (the message suggests jitter or diagonal mode).
Matrix cholesky(const Matrix& s);

// Central differences (f(p+eps*e_i) - f(p-eps*e_i)) / (2 eps) per coordinate.
std::vector<double> finite_diff_grad(const std::function<double(const std::vector<double>&)>& f,
                                     const std::vector<double>& p, double eps);

// mean + L*u with u iid standard normal. scale is either a 1 x D row of
// standard deviations (diagonal) or a D x D lower-triangular factor.
std::vector<double> gaussian_sample(Rng& rng, const std::vector<double>& mean,
                                    const Matrix& scale);

}  // namespace svqvae
