#include "svqvae/model.hpp"

#include <cmath>
#include <stdexcept>

#include "svqvae/kernels.hpp"

namespace svqvae {

Variant variant_from_string(const std::string& name) {
    if (name == "supervised") return Variant::supervised;
    if (name == "baseline") return Variant::baseline;
    throw std::invalid_argument("unknown variant '" + name + "' (expected supervised, baseline)");
}

std::string variant_to_string(Variant v) {
    return v == Variant::supervised ? "supervised" : "baseline";
}

void ModelConfig::validate() const {
    if (input_dim == 0) throw std::invalid_argument("config: input_dim must be positive");
    if (code_dim == 0) throw std::invalid_argument("config: code_dim must be positive");
    if (num_codes == 0) throw std::invalid_argument("config: num_codes must be positive");
    if (encoder_layers.empty()) throw std::invalid_argument("config: encoder has no layers");
    if (decoder_layers.empty()) throw std::invalid_argument("config: decoder has no layers");
    for (const auto& l : encoder_layers) {
        if (l.width == 0) throw std::invalid_argument("config: encoder layer width 0");
    }
    for (const auto& l : decoder_layers) {
        if (l.width == 0) throw std::invalid_argument("config: decoder layer width 0");
    }
    if (encoder_layers.back().width != code_dim) {
        throw std::invalid_argument("config: final encoder width " +
                                    std::to_string(encoder_layers.back().width) +
                                    " must equal code_dim " + std::to_string(code_dim));
    }
    if (decoder_layers.back().width != input_dim) {
        throw std::invalid_argument("config: final decoder width " +
                                    std::to_string(decoder_layers.back().width) +
                                    " must equal input_dim " + std::to_string(input_dim));
    }
    if (decoder_layers.back().act != Activation::tanh) {
        throw std::invalid_argument("config: decoder output activation must be tanh");
    }
    if (beta < 0.0 || gamma < 0.0) throw std::invalid_argument("config: beta and gamma must be >= 0");
    if (learning_rate <= 0.0) throw std::invalid_argument("config: learning_rate must be positive");
    if (batch_size == 0) throw std::invalid_argument("config: batch_size must be positive");
    if (epochs == 0) throw std::invalid_argument("config: epochs must be positive");
    if (output_lo >= output_hi) throw std::invalid_argument("config: output range is not increasing");
    if (clip_norm < 0.0) throw std::invalid_argument("config: clip_norm must be >= 0");
}

Model init_model(const ModelConfig& config, Rng& rng) {
    config.validate();
    Model model;
    model.config = config;

    auto build_layers = [&](const std::vector<LayerSpec>& specs, std::size_t in_dim) {
        std::vector<LayerParams> layers;
        for (const auto& spec : specs) {
            LayerParams layer;
            layer.act = spec.act;
            layer.weights = Matrix(in_dim, spec.width);
            const double bound = std::sqrt(6.0 / static_cast<double>(in_dim + spec.width));
            for (double& w : layer.weights.data) {
                w = bound * (2.0 * rng.next_double() - 1.0);
            }
            layer.bias.assign(spec.width, 0.0);
            layers.push_back(std::move(layer));
            in_dim = spec.width;
        }
        return layers;
    };
    model.encoder = build_layers(config.encoder_layers, config.input_dim);
    model.decoder = build_layers(config.decoder_layers, config.code_dim);

    model.embedding = Matrix(config.num_codes, config.code_dim);
    const double code_bound = 1.0 / static_cast<double>(config.num_codes);
    for (double& e : model.embedding.data) {
        e = code_bound * (2.0 * rng.next_double() - 1.0);
    }
    return model;
}

namespace {

Matrix forward_layers(const std::vector<LayerParams>& layers, const Matrix& input,
                      std::vector<Matrix>* pre_out, std::vector<Matrix>* act_out) {
    Matrix cur = input;
    for (const auto& layer : layers) {
        Matrix pre = affine(cur, layer.weights, layer.bias);
        Matrix out = activate(layer.act, pre, ActivationMode::value);
        if (pre_out) pre_out->push_back(std::move(pre));
        cur = out;
        if (act_out) act_out->push_back(cur);
    }
    return cur;
}

void check_labels(const std::vector<int>* labels, std::size_t batch, std::size_t num_codes) {
    if (!labels) return;
    if (labels->size() != batch) {
        throw std::invalid_argument("labels size " + std::to_string(labels->size()) +
                                    " does not match batch size " + std::to_string(batch));
    }
    for (int y : *labels) {
        if (y < 0 || static_cast<std::size_t>(y) >= num_codes) {
            throw std::invalid_argument("label " + std::to_string(y) + " outside [0, " +
                                        std::to_string(num_codes) + ")");
        }
    }
}

double row_sqdist(const Matrix& a, std::size_t arow, const Matrix& b, std::size_t brow) {
    const double* pa = a.row_ptr(arow);
    const double* pb = b.row_ptr(brow);
    double acc = 0.0;
    for (std::size_t j = 0; j < a.cols; ++j) {
        const double d = pa[j] - pb[j];
        acc += d * d;
    }
    return acc;
}

}  // namespace

Matrix encode(const Model& model, const Matrix& x) {
    if (x.cols != model.config.input_dim) {
        throw std::invalid_argument("encode: input is " + shape_str(x) + ", model expects " +
                                    std::to_string(model.config.input_dim) + " columns");
    }
    return forward_layers(model.encoder, x, nullptr, nullptr);
}

std::vector<int> nearest_code(const Matrix& embedding, const Matrix& z_e) {
    if (embedding.cols != z_e.cols) {
        throw std::invalid_argument("nearest_code: latent is " + shape_str(z_e) +
                                    ", embedding is " + shape_str(embedding));
    }
    std::vector<int> nearest(z_e.rows, 0);
    for (std::size_t b = 0; b < z_e.rows; ++b) {
        double best = row_sqdist(z_e, b, embedding, 0);
        int best_j = 0;
        for (std::size_t j = 1; j < embedding.rows; ++j) {
            const double d = row_sqdist(z_e, b, embedding, j);
            if (d < best) {  // strict: ties keep the lowest index
                best = d;
                best_j = static_cast<int>(j);
            }
        }
        nearest[b] = best_j;
    }
    return nearest;
}

std::pair<Matrix, std::vector<int>> quantize(const Model& model, const Matrix& z_e,
                                             const std::vector<int>* labels, Phase phase) {
    const bool supervised_train =
        model.config.variant == Variant::supervised && phase == Phase::train;
    if (supervised_train && !labels) {
        throw std::invalid_argument("quantize: supervised training requires labels");
    }
    check_labels(labels, z_e.rows, model.embedding.rows);
    const std::vector<int> nearest = nearest_code(model.embedding, z_e);
    Matrix z_q(z_e.rows, z_e.cols);
    for (std::size_t b = 0; b < z_e.rows; ++b) {
        const int idx = supervised_train ? (*labels)[b] : nearest[b];
        const double* src = model.embedding.row_ptr(static_cast<std::size_t>(idx));
        std::copy(src, src + z_e.cols, z_q.row_ptr(b));
    }
    return {std::move(z_q), nearest};
}

Matrix decode(const Model& model, const Matrix& z_q) {
    if (z_q.cols != model.config.code_dim) {
        throw std::invalid_argument("decode: input is " + shape_str(z_q) + ", model expects " +
                                    std::to_string(model.config.code_dim) + " columns");
    }
    Matrix out = forward_layers(model.decoder, z_q, nullptr, nullptr);
    return rescale_output(out, model.config.output_lo, model.config.output_hi);
}

ForwardTrace loss_forward(const Model& model, const Matrix& x, const std::vector<int>* labels,
                          Phase phase, const std::vector<int>* frozen_nearest) {
    const bool supervised = model.config.variant == Variant::supervised;
    if (supervised && !labels) {
        throw std::invalid_argument("loss_forward: supervised variant requires labels");
    }
    if (x.cols != model.config.input_dim) {
        throw std::invalid_argument("loss_forward: input is " + shape_str(x) +
                                    ", model expects " +
                                    std::to_string(model.config.input_dim) + " columns");
    }
    check_labels(labels, x.rows, model.embedding.rows);
    if (frozen_nearest && frozen_nearest->size() != x.rows) {
        throw std::invalid_argument("loss_forward: frozen nearest-code count mismatch");
    }

    ForwardTrace trace;
    trace.phase = phase;
    trace.z_e = forward_layers(model.encoder, x, &trace.encoder_pre, &trace.encoder_out);
    trace.nearest = frozen_nearest ? *frozen_nearest : nearest_code(model.embedding, trace.z_e);

    const bool route_by_label = supervised && phase == Phase::train;
    const std::size_t batch = x.rows;
    trace.quant_index.resize(batch);
    trace.z_q = Matrix(batch, model.config.code_dim);
    for (std::size_t b = 0; b < batch; ++b) {
        const int idx = route_by_label ? (*labels)[b] : trace.nearest[b];
        trace.quant_index[b] = idx;
        const double* src = model.embedding.row_ptr(static_cast<std::size_t>(idx));
        std::copy(src, src + model.config.code_dim, trace.z_q.row_ptr(b));
    }

    Matrix out = forward_layers(model.decoder, trace.z_q, &trace.decoder_pre, &trace.decoder_out);
    trace.x_hat = rescale_output(out, model.config.output_lo, model.config.output_hi);

    LossTerms& loss = trace.loss;
    loss.recon = mse(x, trace.x_hat);
    double vq_sum = 0.0;
    double mis_sum = 0.0;
    for (std::size_t b = 0; b < batch; ++b) {
        const int target = supervised ? (*labels)[b] : trace.nearest[b];
        vq_sum += row_sqdist(trace.z_e, b, model.embedding, static_cast<std::size_t>(target));
        if (supervised && trace.nearest[b] != target) {
            mis_sum += row_sqdist(trace.z_e, b, model.embedding,
                                  static_cast<std::size_t>(trace.nearest[b]));
        }
    }
    loss.vq = vq_sum / static_cast<double>(batch);
    loss.commit = loss.vq;
    loss.mis_vq = mis_sum / static_cast<double>(batch);
    loss.divergence = loss.mis_vq;
    loss.total = loss.recon + loss.vq + model.config.beta * loss.commit -
                 (loss.mis_vq + model.config.gamma * loss.divergence);
    return trace;
}

namespace {

// Backprop of one dense stack. grad_out is d(loss)/d(activations of the last
// layer); returns d(loss)/d(stack input) and fills per-layer parameter grads.
Matrix backprop_layers(const std::vector<LayerParams>& layers, const Matrix& input,
                       const std::vector<Matrix>& pre, const std::vector<Matrix>& act,
                       Matrix grad_out, std::vector<LayerGrads>& grads) {
    grads.resize(layers.size());
    Matrix grad = std::move(grad_out);
    for (std::size_t li = layers.size(); li-- > 0;) {
        const Matrix dact = activate(layers[li].act, pre[li], ActivationMode::derivative);
        for (std::size_t i = 0; i < grad.data.size(); ++i) grad.data[i] *= dact.data[i];

        const Matrix& layer_input = li == 0 ? input : act[li - 1];
        grads[li].weights = kernels::matmul_at_b(layer_input, grad);
        grads[li].bias.assign(layers[li].weights.cols, 0.0);
        for (std::size_t b = 0; b < grad.rows; ++b) {
            const double* row = grad.row_ptr(b);
            for (std::size_t j = 0; j < grad.cols; ++j) grads[li].bias[j] += row[j];
        }
        grad = kernels::matmul_a_bt(grad, layers[li].weights);
    }
    return grad;
}

}  // namespace

Gradients backward(const Model& model, const ForwardTrace& trace, const Matrix& x,
                   const std::vector<int>* labels) {
    if (trace.phase != Phase::train) {
        throw std::invalid_argument("backward: trace must come from a train-phase forward");
    }
    const bool supervised = model.config.variant == Variant::supervised;
    if (supervised && !labels) {
        throw std::invalid_argument("backward: supervised variant requires labels");
    }
    const std::size_t batch = x.rows;
    if (trace.z_e.rows != batch || !trace.x_hat.same_shape(x)) {
        throw std::invalid_argument("backward: trace does not match the given batch");
    }
    check_labels(labels, batch, model.embedding.rows);

    const double inv_batch = 1.0 / static_cast<double>(batch);
    Gradients grads;

    // reconstruction: d mse / d x_hat, then back through the output rescale
    const double half_span = 0.5 * (model.config.output_hi - model.config.output_lo);
    Matrix grad_out(x.rows, x.cols);
    const double recon_scale = 2.0 / static_cast<double>(x.data.size());
    for (std::size_t i = 0; i < x.data.size(); ++i) {
        grad_out.data[i] = recon_scale * (trace.x_hat.data[i] - x.data[i]) * half_span;
    }
    grads.recon_grad_zq = backprop_layers(model.decoder, trace.z_q, trace.decoder_pre,
                                          trace.decoder_out, std::move(grad_out), grads.decoder);

    // straight-through: the reconstruction gradient at z_q lands on z_e verbatim
    grads.recon_grad_ze = grads.recon_grad_zq;

    // commitment pulls z_e toward its code; divergence pushes it off a wrong
    // nearest code; the embedding sees only the VQ and mis-class VQ terms
    grads.ze_grad = grads.recon_grad_ze;
    grads.embedding = Matrix(model.embedding.rows, model.embedding.cols);
    const double beta = model.config.beta;
    const double gamma = model.config.gamma;
    const std::size_t dim = model.config.code_dim;
    for (std::size_t b = 0; b < batch; ++b) {
        const int target = supervised ? (*labels)[b] : trace.nearest[b];
        const int k = trace.nearest[b];
        const double* ze = trace.z_e.row_ptr(b);
        const double* et = model.embedding.row_ptr(static_cast<std::size_t>(target));
        double* dze = grads.ze_grad.row_ptr(b);
        double* det = grads.embedding.row_ptr(static_cast<std::size_t>(target));
        for (std::size_t j = 0; j < dim; ++j) {
            const double diff = ze[j] - et[j];
            dze[j] += 2.0 * beta * inv_batch * diff;
            det[j] += 2.0 * inv_batch * (et[j] - ze[j]);
        }
        if (supervised && k != target) {
            const double* ek = model.embedding.row_ptr(static_cast<std::size_t>(k));
            double* dek = grads.embedding.row_ptr(static_cast<std::size_t>(k));
            for (std::size_t j = 0; j < dim; ++j) {
                const double diff = ze[j] - ek[j];
                dze[j] -= 2.0 * gamma * inv_batch * diff;
                dek[j] -= 2.0 * inv_batch * (ek[j] - ze[j]);
            }
        }
    }

    backprop_layers(model.encoder, x, trace.encoder_pre, trace.encoder_out, grads.ze_grad,
                    grads.encoder);
    return grads;
}

AdamState AdamState::init(const Model& model) {
    AdamState state;
    auto zeros_like = [](const std::vector<LayerParams>& layers) {
        std::vector<LayerGrads> out(layers.size());
        for (std::size_t i = 0; i < layers.size(); ++i) {
            out[i].weights = Matrix(layers[i].weights.rows, layers[i].weights.cols);
            out[i].bias.assign(layers[i].bias.size(), 0.0);
        }
        return out;
    };
    state.encoder_m = zeros_like(model.encoder);
    state.encoder_v = zeros_like(model.encoder);
    state.decoder_m = zeros_like(model.decoder);
    state.decoder_v = zeros_like(model.decoder);
    state.embedding_m = Matrix(model.embedding.rows, model.embedding.cols);
    state.embedding_v = Matrix(model.embedding.rows, model.embedding.cols);
    return state;
}

namespace {

void adam_update(double* param, const double* grad, double* m, double* v, std::size_t n,
                 double lr, double bc1, double bc2) {
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = AdamState::beta1 * m[i] + (1.0 - AdamState::beta1) * grad[i];
        v[i] = AdamState::beta2 * v[i] + (1.0 - AdamState::beta2) * grad[i] * grad[i];
        const double m_hat = m[i] / bc1;
        const double v_hat = v[i] / bc2;
        param[i] -= lr * m_hat / (std::sqrt(v_hat) + AdamState::epsilon);
    }
}

}  // namespace

void adam_step(Model& model, const Gradients& grads, AdamState& state, double lr) {
    if (grads.encoder.size() != model.encoder.size() ||
        grads.decoder.size() != model.decoder.size() ||
        !grads.embedding.same_shape(model.embedding)) {
        throw std::invalid_argument("adam_step: gradient shapes do not mirror the model");
    }
    state.step += 1;
    const double t = static_cast<double>(state.step);
    const double bc1 = 1.0 - std::pow(AdamState::beta1, t);
    const double bc2 = 1.0 - std::pow(AdamState::beta2, t);

    auto update_stack = [&](std::vector<LayerParams>& layers, const std::vector<LayerGrads>& g,
                            std::vector<LayerGrads>& m, std::vector<LayerGrads>& v) {
        for (std::size_t i = 0; i < layers.size(); ++i) {
            adam_update(layers[i].weights.data.data(), g[i].weights.data.data(),
                        m[i].weights.data.data(), v[i].weights.data.data(),
                        layers[i].weights.data.size(), lr, bc1, bc2);
            adam_update(layers[i].bias.data(), g[i].bias.data(), m[i].bias.data(),
                        v[i].bias.data(), layers[i].bias.size(), lr, bc1, bc2);
        }
    };
    update_stack(model.encoder, grads.encoder, state.encoder_m, state.encoder_v);
    update_stack(model.decoder, grads.decoder, state.decoder_m, state.decoder_v);
    adam_update(model.embedding.data.data(), grads.embedding.data.data(),
                state.embedding_m.data.data(), state.embedding_v.data.data(),
                model.embedding.data.size(), lr, bc1, bc2);
}

void clip_gradients(Gradients& grads, double max_norm) {
    if (max_norm <= 0.0) return;
    double sq = 0.0;
    auto add_sq = [&sq](const std::vector<double>& v) {
        for (double g : v) sq += g * g;
    };
    for (const auto& l : grads.encoder) {
        add_sq(l.weights.data);
        add_sq(l.bias);
    }
    for (const auto& l : grads.decoder) {
        add_sq(l.weights.data);
        add_sq(l.bias);
    }
    add_sq(grads.embedding.data);
    const double norm = std::sqrt(sq);
    if (norm <= max_norm || norm == 0.0) return;
    const double scale = max_norm / norm;
    auto scale_vec = [scale](std::vector<double>& v) {
        for (double& g : v) g *= scale;
    };
    for (auto& l : grads.encoder) {
        scale_vec(l.weights.data);
        scale_vec(l.bias);
    }
    for (auto& l : grads.decoder) {
        scale_vec(l.weights.data);
        scale_vec(l.bias);
    }
    scale_vec(grads.embedding.data);
}

bool ClassLatentStats::usable(std::size_t class_index) const {
    return class_index < counts.size() && counts[class_index] > 0;
}

ClassLatentStats estimate_class_latent_stats(const Model& model, const Dataset& ds,
                                             CovarianceMode mode) {
    const std::size_t y = ds.num_classes();
    if (model.config.variant == Variant::supervised && y != model.config.num_codes) {
        throw std::invalid_argument("class stats: dataset has " + std::to_string(y) +
                                    " classes, model has " +
                                    std::to_string(model.config.num_codes) + " codes");
    }
    const Matrix z = encode(model, ds.features);
    const std::size_t d = z.cols;

    ClassLatentStats stats;
    stats.mode = mode;
    stats.counts.assign(y, 0);
    stats.means = Matrix(y, d);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto c = static_cast<std::size_t>(ds.labels[i]);
        stats.counts[c]++;
        const double* src = z.row_ptr(i);
        double* dst = stats.means.row_ptr(c);
        for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
    }
    for (std::size_t c = 0; c < y; ++c) {
        if (stats.counts[c] == 0) continue;
        double* dst = stats.means.row_ptr(c);
        for (std::size_t j = 0; j < d; ++j) dst[j] /= static_cast<double>(stats.counts[c]);
    }

    // gather per-class latent rows once
    std::vector<Matrix> groups(y);
    for (std::size_t c = 0; c < y; ++c) groups[c] = Matrix(stats.counts[c], d);
    std::vector<std::size_t> fill(y, 0);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto c = static_cast<std::size_t>(ds.labels[i]);
        const double* src = z.row_ptr(i);
        std::copy(src, src + d, groups[c].row_ptr(fill[c]++));
    }

    if (mode == CovarianceMode::diagonal) {
        stats.stddev = Matrix(y, d);
        for (std::size_t c = 0; c < y; ++c) {
            if (stats.counts[c] == 0) continue;
            const Matrix var = covariance(groups[c], CovarianceMode::diagonal);
            for (std::size_t j = 0; j < d; ++j) stats.stddev(c, j) = std::sqrt(var(0, j));
        }
    } else {
        stats.chol_factors.assign(y, Matrix(d, d));
        for (std::size_t c = 0; c < y; ++c) {
            if (stats.counts[c] == 0) continue;
            const Matrix cov = covariance(groups[c], CovarianceMode::full);
            bool all_zero = true;
            for (double v : cov.data) {
                if (v != 0.0) {
                    all_zero = false;
                    break;
                }
            }
            if (all_zero) continue;  // degenerate class: factor stays zero
            try {
                stats.chol_factors[c] = cholesky(cov);
            } catch (const std::invalid_argument& e) {
                throw std::invalid_argument("class '" + ds.class_names[c] +
                                            "' latent covariance: " + e.what());
            }
        }
    }

    stats.class_distribution.assign(y, 0.0);
    for (std::size_t c = 0; c < y; ++c) {
        stats.class_distribution[c] =
            static_cast<double>(stats.counts[c]) / static_cast<double>(ds.size());
    }
    return stats;
}

std::pair<Matrix, std::vector<int>> generate(const Model& model, const ClassLatentStats& stats,
                                             std::optional<int> class_index, std::size_t n,
                                             Rng& rng) {
    const std::size_t y = stats.counts.size();
    if (class_index) {
        const int c = *class_index;
        if (c < 0 || static_cast<std::size_t>(c) >= y ||
            static_cast<std::size_t>(c) >= model.embedding.rows) {
            throw std::invalid_argument("generate: class index " + std::to_string(c) +
                                        " out of range");
        }
        if (!stats.usable(static_cast<std::size_t>(c))) {
            throw std::invalid_argument("generate: class " + std::to_string(c) +
                                        " has no samples; its statistics are unusable");
        }
    }
    Matrix latents(n, model.config.code_dim);
    std::vector<int> classes(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t c;
        if (class_index) {
            c = static_cast<std::size_t>(*class_index);
        } else {
            const double u = rng.next_double();
            double cum = 0.0;
            c = y - 1;
            for (std::size_t j = 0; j < y; ++j) {
                cum += stats.class_distribution[j];
                if (u < cum) {
                    c = j;
                    break;
                }
            }
            if (!stats.usable(c)) {
                throw std::invalid_argument("generate: sampled class " + std::to_string(c) +
                                            " has unusable statistics");
            }
        }
        classes[i] = static_cast<int>(c);

        // mean is the embedding code e_y, not the empirical latent mean
        const double* code = model.embedding.row_ptr(c);
        std::vector<double> mean(code, code + model.config.code_dim);
        std::vector<double> sample;
        if (stats.mode == CovarianceMode::diagonal) {
            Matrix scale(1, model.config.code_dim);
            for (std::size_t j = 0; j < model.config.code_dim; ++j) scale(0, j) = stats.stddev(c, j);
            sample = gaussian_sample(rng, mean, scale);
        } else {
            sample = gaussian_sample(rng, mean, stats.chol_factors[c]);
        }
        std::copy(sample.begin(), sample.end(), latents.row_ptr(i));
    }
    if (n == 0) return {Matrix(0, model.config.input_dim), classes};
    return {decode(model, latents), classes};
}

}  // namespace svqvae
