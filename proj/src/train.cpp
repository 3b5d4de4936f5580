#include "svqvae/train.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "svqvae/analysis.hpp"

namespace svqvae {

std::vector<std::vector<std::size_t>> make_epoch_batches(std::size_t n, std::size_t batch_size,
                                                         Rng& rng) {
    if (n == 0) throw std::invalid_argument("make_epoch_batches: empty dataset");
    if (batch_size == 0) throw std::invalid_argument("make_epoch_batches: batch_size is 0");
    const std::vector<std::size_t> perm = rng.permutation(n);
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t start = 0; start < n; start += batch_size) {
        const std::size_t end = std::min(start + batch_size, n);
        batches.emplace_back(perm.begin() + static_cast<std::ptrdiff_t>(start),
                             perm.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return batches;
}

namespace {

Matrix gather_rows(const Matrix& src, const std::vector<std::size_t>& rows) {
    Matrix out(rows.size(), src.cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double* from = src.row_ptr(rows[i]);
        std::copy(from, from + src.cols, out.row_ptr(i));
    }
    return out;
}

}  // namespace

TrainResult train(const ModelConfig& config, const Dataset& train_ds, const Dataset* eval_ds,
                  Rng& rng, std::ostream* log) {
    config.validate();
    train_ds.validate();
    if (train_ds.size() == 0) throw std::invalid_argument("train: empty dataset");
    if (train_ds.feature_dim() != config.input_dim) {
        throw std::invalid_argument("train: dataset has " + std::to_string(train_ds.feature_dim()) +
                                    " features, config expects " + std::to_string(config.input_dim));
    }
    if (config.variant == Variant::supervised && train_ds.num_classes() != config.num_codes) {
        throw std::invalid_argument("train: dataset has " + std::to_string(train_ds.num_classes()) +
                                    " classes but the supervised model has " +
                                    std::to_string(config.num_codes) + " codes");
    }

    TrainResult result;
    result.model = init_model(config, rng);
    result.model.class_names = train_ds.class_names;
    result.adam = AdamState::init(result.model);

    const std::size_t n = train_ds.size();
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto batches = make_epoch_batches(n, config.batch_size, rng);

        LossTerms sums;
        std::vector<int> assignments;
        assignments.reserve(n);
        for (const auto& batch_rows : batches) {
            const Matrix x = gather_rows(train_ds.features, batch_rows);
            std::vector<int> labels(batch_rows.size());
            for (std::size_t i = 0; i < batch_rows.size(); ++i) {
                labels[i] = train_ds.labels[batch_rows[i]];
            }
            const ForwardTrace trace = loss_forward(result.model, x, &labels, Phase::train);
            Gradients grads = backward(result.model, trace, x, &labels);
            if (config.clip_norm > 0.0) clip_gradients(grads, config.clip_norm);
            adam_step(result.model, grads, result.adam, config.learning_rate);

            const auto bsz = static_cast<double>(batch_rows.size());
            sums.recon += trace.loss.recon * bsz;
            sums.vq += trace.loss.vq * bsz;
            sums.commit += trace.loss.commit * bsz;
            sums.mis_vq += trace.loss.mis_vq * bsz;
            sums.divergence += trace.loss.divergence * bsz;
            sums.total += trace.loss.total * bsz;
            assignments.insert(assignments.end(), trace.nearest.begin(), trace.nearest.end());

            // the negated terms are unbounded below; flag batches where they dwarf
            // the VQ objective
            if (trace.loss.divergence > 10.0 * std::max(trace.loss.vq, 1e-300)) {
                std::cerr << "warning: epoch " << epoch << ": divergence term "
                          << trace.loss.divergence << " exceeds 10x VQ term " << trace.loss.vq
                          << "; consider enabling gradient clipping (clip_norm)\n";
            }
        }

        EpochRecord record;
        record.epoch = epoch;
        const double inv_n = 1.0 / static_cast<double>(n);
        record.loss.recon = sums.recon * inv_n;
        record.loss.vq = sums.vq * inv_n;
        record.loss.commit = sums.commit * inv_n;
        record.loss.mis_vq = sums.mis_vq * inv_n;
        record.loss.divergence = sums.divergence * inv_n;
        record.loss.total = sums.total * inv_n;
        record.perplexity = perplexity(assignments, result.model.embedding.rows);
        if (eval_ds) {
            const AnalysisReport eval_report = evaluate(result.model, *eval_ds);
            record.eval_mse = eval_report.mse;
            record.eval_accuracy = eval_report.accuracy;
        }
        record.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.history.epochs.push_back(record);

        if (log) {
            std::ostringstream line;
            line.precision(10);
            line << "epoch=" << epoch << " recon=" << record.loss.recon << " vq=" << record.loss.vq
                 << " commit=" << record.loss.commit << " mis=" << record.loss.mis_vq
                 << " div=" << record.loss.divergence << " total=" << record.loss.total
                 << " perplexity=" << record.perplexity;
            *log << line.str() << '\n' << std::flush;
        }
    }
    return result;
}

namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows; ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols; ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& rows, const std::string& what) {
    if (!rows.is_array()) throw std::invalid_argument("checkpoint: " + what + " is not an array");
    Matrix m;
    m.rows = rows.size();
    m.cols = m.rows == 0 ? 0 : rows[0].size();
    m.data.reserve(m.rows * m.cols);
    for (const auto& row : rows) {
        if (!row.is_array() || row.size() != m.cols) {
            throw std::invalid_argument("checkpoint: ragged rows in " + what);
        }
        for (const auto& v : row) m.data.push_back(v.get<double>());
    }
    return m;
}

json layers_to_json(const std::vector<LayerParams>& layers) {
    json arr = json::array();
    for (const auto& layer : layers) {
        arr.push_back({{"weights", matrix_to_json(layer.weights)},
                       {"bias", layer.bias},
                       {"activation", activation_to_string(layer.act)}});
    }
    return arr;
}

std::vector<LayerParams> layers_from_json(const json& arr, const std::string& what) {
    std::vector<LayerParams> layers;
    for (const auto& entry : arr) {
        LayerParams layer;
        layer.weights = matrix_from_json(entry.at("weights"), what + " weights");
        layer.bias = entry.at("bias").get<std::vector<double>>();
        layer.act = activation_from_string(entry.at("activation").get<std::string>());
        layers.push_back(std::move(layer));
    }
    return layers;
}

json layer_specs_to_json(const std::vector<LayerSpec>& specs) {
    json arr = json::array();
    for (const auto& spec : specs) {
        arr.push_back({{"width", spec.width}, {"activation", activation_to_string(spec.act)}});
    }
    return arr;
}

std::vector<LayerSpec> layer_specs_from_json(const json& arr) {
    std::vector<LayerSpec> specs;
    for (const auto& entry : arr) {
        specs.push_back({entry.at("width").get<std::size_t>(),
                         activation_from_string(entry.at("activation").get<std::string>())});
    }
    return specs;
}

json moments_to_json(const std::vector<LayerGrads>& grads) {
    json arr = json::array();
    for (const auto& g : grads) {
        arr.push_back({{"weights", matrix_to_json(g.weights)}, {"bias", g.bias}});
    }
    return arr;
}

std::vector<LayerGrads> moments_from_json(const json& arr, const std::string& what) {
    std::vector<LayerGrads> grads;
    for (const auto& entry : arr) {
        LayerGrads g;
        g.weights = matrix_from_json(entry.at("weights"), what);
        g.bias = entry.at("bias").get<std::vector<double>>();
        grads.push_back(std::move(g));
    }
    return grads;
}

void check_stack_shapes(const std::vector<LayerParams>& layers,
                        const std::vector<LayerSpec>& specs, std::size_t in_dim,
                        const std::string& what) {
    if (layers.size() != specs.size()) {
        throw std::invalid_argument("checkpoint: " + what + " has " +
                                    std::to_string(layers.size()) + " layers, config declares " +
                                    std::to_string(specs.size()));
    }
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (layers[i].weights.rows != in_dim || layers[i].weights.cols != specs[i].width ||
            layers[i].bias.size() != specs[i].width || layers[i].act != specs[i].act) {
            throw std::invalid_argument("checkpoint: " + what + " layer " + std::to_string(i) +
                                        " does not match the embedded config");
        }
        if (!all_finite(layers[i].weights)) {
            throw std::invalid_argument("checkpoint: non-finite weight in " + what);
        }
        in_dim = specs[i].width;
    }
}

}  // namespace

void save_checkpoint(const Model& model, const AdamState* adam, const std::string& path) {
    json doc;
    doc["format_version"] = kCheckpointFormatVersion;
    doc["config"] = {{"variant", variant_to_string(model.config.variant)},
                     {"input_dim", model.config.input_dim},
                     {"code_dim", model.config.code_dim},
                     {"num_codes", model.config.num_codes},
                     {"encoder_layers", layer_specs_to_json(model.config.encoder_layers)},
                     {"decoder_layers", layer_specs_to_json(model.config.decoder_layers)},
                     {"output_range", {model.config.output_lo, model.config.output_hi}},
                     {"beta", model.config.beta},
                     {"gamma", model.config.gamma},
                     {"learning_rate", model.config.learning_rate},
                     {"batch_size", model.config.batch_size},
                     {"epochs", model.config.epochs},
                     {"seed", model.config.seed},
                     {"clip_norm", model.config.clip_norm},
                     {"image_rows", model.config.image_rows},
                     {"image_cols", model.config.image_cols}};
    doc["class_names"] = model.class_names;
    doc["encoder"] = layers_to_json(model.encoder);
    doc["decoder"] = layers_to_json(model.decoder);
    doc["embedding"] = matrix_to_json(model.embedding);
    if (adam) {
        doc["adam"] = {{"step", adam->step},
                       {"encoder_m", moments_to_json(adam->encoder_m)},
                       {"encoder_v", moments_to_json(adam->encoder_v)},
                       {"decoder_m", moments_to_json(adam->decoder_m)},
                       {"decoder_v", moments_to_json(adam->decoder_v)},
                       {"embedding_m", matrix_to_json(adam->embedding_m)},
                       {"embedding_v", matrix_to_json(adam->embedding_v)}};
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out << doc.dump(1) << '\n';
    if (!out) throw std::runtime_error("failed writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open checkpoint: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw std::invalid_argument("checkpoint " + path + ": parse error: " + e.what());
    }
    try {
        const int version = doc.at("format_version").get<int>();
        if (version != kCheckpointFormatVersion) {
            throw std::invalid_argument("checkpoint " + path + ": unsupported format_version " +
                                        std::to_string(version) + " (this build reads version " +
                                        std::to_string(kCheckpointFormatVersion) + ")");
        }
        Checkpoint ckpt;
        const json& cfg = doc.at("config");
        ModelConfig& config = ckpt.model.config;
        config.variant = variant_from_string(cfg.at("variant").get<std::string>());
        config.input_dim = cfg.at("input_dim").get<std::size_t>();
        config.code_dim = cfg.at("code_dim").get<std::size_t>();
        config.num_codes = cfg.at("num_codes").get<std::size_t>();
        config.encoder_layers = layer_specs_from_json(cfg.at("encoder_layers"));
        config.decoder_layers = layer_specs_from_json(cfg.at("decoder_layers"));
        config.output_lo = cfg.at("output_range").at(0).get<double>();
        config.output_hi = cfg.at("output_range").at(1).get<double>();
        config.beta = cfg.at("beta").get<double>();
        config.gamma = cfg.at("gamma").get<double>();
        config.learning_rate = cfg.at("learning_rate").get<double>();
        config.batch_size = cfg.at("batch_size").get<std::size_t>();
        config.epochs = cfg.at("epochs").get<std::size_t>();
        config.seed = cfg.at("seed").get<std::uint64_t>();
        config.clip_norm = cfg.at("clip_norm").get<double>();
        config.image_rows = cfg.at("image_rows").get<std::size_t>();
        config.image_cols = cfg.at("image_cols").get<std::size_t>();
        config.validate();

        ckpt.model.class_names = doc.at("class_names").get<std::vector<std::string>>();
        ckpt.model.encoder = layers_from_json(doc.at("encoder"), "encoder");
        ckpt.model.decoder = layers_from_json(doc.at("decoder"), "decoder");
        ckpt.model.embedding = matrix_from_json(doc.at("embedding"), "embedding");

        check_stack_shapes(ckpt.model.encoder, config.encoder_layers, config.input_dim, "encoder");
        check_stack_shapes(ckpt.model.decoder, config.decoder_layers, config.code_dim, "decoder");
        if (ckpt.model.embedding.rows != config.num_codes ||
            ckpt.model.embedding.cols != config.code_dim) {
            throw std::invalid_argument("checkpoint: embedding is " +
                                        shape_str(ckpt.model.embedding) + ", config declares " +
                                        std::to_string(config.num_codes) + "x" +
                                        std::to_string(config.code_dim));
        }
        if (!all_finite(ckpt.model.embedding)) {
            throw std::invalid_argument("checkpoint: non-finite embedding entry");
        }

        if (doc.contains("adam")) {
            const json& adam = doc.at("adam");
            AdamState state;
            state.step = adam.at("step").get<std::uint64_t>();
            state.encoder_m = moments_from_json(adam.at("encoder_m"), "adam encoder_m");
            state.encoder_v = moments_from_json(adam.at("encoder_v"), "adam encoder_v");
            state.decoder_m = moments_from_json(adam.at("decoder_m"), "adam decoder_m");
            state.decoder_v = moments_from_json(adam.at("decoder_v"), "adam decoder_v");
            state.embedding_m = matrix_from_json(adam.at("embedding_m"), "adam embedding_m");
            state.embedding_v = matrix_from_json(adam.at("embedding_v"), "adam embedding_v");
            ckpt.adam = std::move(state);
        }
        return ckpt;
    } catch (const json::exception& e) {
        throw std::invalid_argument("checkpoint " + path + ": malformed document: " + e.what());
    }
}

void write_history_csv(const TrainHistory& history, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write history: " + path);
    out << "epoch,recon,vq,commit,mis_vq,divergence,total,perplexity,wall_seconds";
    const bool has_eval = !history.epochs.empty() && history.epochs.front().eval_mse.has_value();
    if (has_eval) out << ",eval_mse,eval_accuracy";
    out << '\n';
    out.precision(17);
    for (const auto& r : history.epochs) {
        out << r.epoch << ',' << r.loss.recon << ',' << r.loss.vq << ',' << r.loss.commit << ','
            << r.loss.mis_vq << ',' << r.loss.divergence << ',' << r.loss.total << ','
            << r.perplexity << ',' << r.wall_seconds;
        if (has_eval) out << ',' << r.eval_mse.value_or(0.0) << ',' << r.eval_accuracy.value_or(0.0);
        out << '\n';
    }
}

}  // namespace svqvae
