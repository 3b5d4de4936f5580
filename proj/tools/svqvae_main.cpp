// svqvae: train, evaluate, sample and analyze S-VQ-VAE / VQ-VAE models.
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "svqvae/analysis.hpp"
#include "svqvae/dataset.hpp"
#include "svqvae/louvain.hpp"
#include "svqvae/model.hpp"
#include "svqvae/reports.hpp"
#include "svqvae/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace svqvae;

namespace {

struct DataOptions {
    std::string mnist_images, mnist_labels;
    std::string csv_path, label_column;
    std::vector<double> csv_range;  // empty or [lo, hi]
    std::size_t blobs_classes = 0, blobs_dims = 0, blobs_per_class = 0;
    double blobs_spread = 5.0, blobs_noise = 1.0;
    std::string split;  // "", "train" or "test"
    double split_fraction = 0.9;
    std::uint64_t split_seed = 1;

    void add_flags(CLI::App* cmd) {
        cmd->add_option("--mnist-images", mnist_images, "IDX image file");
        cmd->add_option("--mnist-labels", mnist_labels, "IDX label file");
        cmd->add_option("--csv", csv_path, "labeled CSV file");
        cmd->add_option("--label-column", label_column, "label column name for --csv");
        cmd->add_option("--range", csv_range, "declared value range for --csv")->expected(2);
        cmd->add_option("--blobs-classes", blobs_classes, "synthetic blob dataset: class count");
        cmd->add_option("--blobs-dims", blobs_dims, "synthetic blobs: feature count");
        cmd->add_option("--blobs-per-class", blobs_per_class, "synthetic blobs: samples per class");
        cmd->add_option("--blobs-spread", blobs_spread, "synthetic blobs: center spread");
        cmd->add_option("--blobs-noise", blobs_noise, "synthetic blobs: noise stddev");
        cmd->add_option("--split", split, "keep only one side of a stratified split")
            ->check(CLI::IsMember({"train", "test"}));
        cmd->add_option("--split-fraction", split_fraction, "train fraction for --split");
        cmd->add_option("--split-seed", split_seed, "seed for the stratified split");
    }

    void merge_json(const json& data) {
        if (data.contains("mnist_images")) mnist_images = data["mnist_images"].get<std::string>();
        if (data.contains("mnist_labels")) mnist_labels = data["mnist_labels"].get<std::string>();
        if (data.contains("csv")) csv_path = data["csv"].get<std::string>();
        if (data.contains("label_column")) label_column = data["label_column"].get<std::string>();
        if (data.contains("range")) csv_range = data["range"].get<std::vector<double>>();
        if (data.contains("blobs_classes")) blobs_classes = data["blobs_classes"].get<std::size_t>();
        if (data.contains("blobs_dims")) blobs_dims = data["blobs_dims"].get<std::size_t>();
        if (data.contains("blobs_per_class")) {
            blobs_per_class = data["blobs_per_class"].get<std::size_t>();
        }
        if (data.contains("blobs_spread")) blobs_spread = data["blobs_spread"].get<double>();
        if (data.contains("blobs_noise")) blobs_noise = data["blobs_noise"].get<double>();
    }

    bool has_source() const {
        return !mnist_images.empty() || !csv_path.empty() || blobs_classes > 0;
    }

    Dataset load() const {
        Dataset ds;
        if (!mnist_images.empty() || !mnist_labels.empty()) {
            if (mnist_images.empty() || mnist_labels.empty()) {
                throw std::invalid_argument("--mnist-images and --mnist-labels are both required");
            }
            ds = load_mnist_idx(mnist_images, mnist_labels);
        } else if (!csv_path.empty()) {
            if (label_column.empty()) {
                throw std::invalid_argument("--csv requires --label-column");
            }
            ds = csv_range.empty()
                     ? load_labeled_csv(csv_path, label_column)
                     : load_labeled_csv(csv_path, label_column, csv_range[0], csv_range[1]);
        } else if (blobs_classes > 0) {
            if (blobs_dims == 0 || blobs_per_class == 0) {
                throw std::invalid_argument(
                    "--blobs-classes requires --blobs-dims and --blobs-per-class");
            }
            Rng blob_rng(split_seed);
            ds = make_blobs(blob_rng, blobs_classes, blobs_dims, blobs_per_class, blobs_spread,
                            blobs_noise);
        } else {
            throw std::invalid_argument(
                "no data source given (use --mnist-images/--mnist-labels, --csv or --blobs-*)");
        }
        if (!split.empty()) {
            Rng split_rng(split_seed);
            auto [train_part, test_part] = stratified_split(ds, split_fraction, split_rng);
            ds = split == "train" ? std::move(train_part) : std::move(test_part);
        }
        return ds;
    }
};

json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    try {
        json doc;
        in >> doc;
        return doc;
    } catch (const json::exception& e) {
        throw std::invalid_argument("config " + path + ": parse error: " + e.what());
    }
}

std::vector<LayerSpec> layers_from_config(const json& arr) {
    std::vector<LayerSpec> specs;
    for (const auto& entry : arr) {
        specs.push_back({entry.at("width").get<std::size_t>(),
                         activation_from_string(entry.at("activation").get<std::string>())});
    }
    return specs;
}

// decoder mirrors the encoder's hidden widths in reverse, ending in a tanh
// output layer at the data dimension
std::vector<LayerSpec> mirror_decoder(const std::vector<LayerSpec>& encoder,
                                      std::size_t input_dim) {
    std::vector<LayerSpec> decoder;
    for (std::size_t i = encoder.size() - 1; i-- > 0;) {
        decoder.push_back(encoder[i]);
    }
    decoder.push_back({input_dim, Activation::tanh});
    return decoder;
}

struct TrainCli {
    std::string config_path, variant, out_dir;
    std::uint64_t seed = 0;
    std::size_t epochs = 0, batch_size = 0;
    double lr = 0.0, beta = -1.0, gamma = -1.0, clip_norm = -1.0;
    DataOptions data;
};

int run_train(const TrainCli& cli, const CLI::App* cmd) {
    json file_cfg = json::object();
    if (!cli.config_path.empty()) file_cfg = load_config_file(cli.config_path);

    DataOptions data = cli.data;
    if (file_cfg.contains("data")) {
        DataOptions from_file;
        from_file.merge_json(file_cfg["data"]);
        from_file.split = data.split;
        from_file.split_fraction = data.split_fraction;
        from_file.split_seed = data.split_seed;
        if (file_cfg.contains("split_fraction") && cmd->count("--split-fraction") == 0) {
            from_file.split_fraction = file_cfg["split_fraction"].get<double>();
        }
        if (!data.has_source()) {
            from_file.split = data.split;
            data = from_file;
        }
    }

    ModelConfig config;
    // preset defaults first, then file values, then flags
    const std::string preset = file_cfg.value("preset", "");
    if (preset == "mnist") {
        config.epochs = 25;
        config.batch_size = 256;
        config.learning_rate = 1e-3;
        config.encoder_layers = {{256, Activation::relu}, {64, Activation::linear}};
        config.code_dim = 64;
    } else if (preset == "dense") {
        config.epochs = 1200;
        config.batch_size = 128;
        config.learning_rate = 1e-4;
        config.encoder_layers = {{1000, Activation::tanh}};
        config.code_dim = 1000;
    } else if (!preset.empty()) {
        throw std::invalid_argument("unknown preset '" + preset + "' (expected mnist, dense)");
    }
    if (file_cfg.contains("variant")) {
        config.variant = variant_from_string(file_cfg["variant"].get<std::string>());
    }
    if (file_cfg.contains("encoder_layers")) {
        config.encoder_layers = layers_from_config(file_cfg["encoder_layers"]);
        config.code_dim = config.encoder_layers.back().width;
    }
    if (file_cfg.contains("code_dim")) config.code_dim = file_cfg["code_dim"].get<std::size_t>();
    if (file_cfg.contains("decoder_layers")) {
        config.decoder_layers = layers_from_config(file_cfg["decoder_layers"]);
    }
    if (file_cfg.contains("num_codes")) config.num_codes = file_cfg["num_codes"].get<std::size_t>();
    if (file_cfg.contains("beta")) config.beta = file_cfg["beta"].get<double>();
    if (file_cfg.contains("gamma")) config.gamma = file_cfg["gamma"].get<double>();
    if (file_cfg.contains("learning_rate")) {
        config.learning_rate = file_cfg["learning_rate"].get<double>();
    }
    if (file_cfg.contains("batch_size")) config.batch_size = file_cfg["batch_size"].get<std::size_t>();
    if (file_cfg.contains("epochs")) config.epochs = file_cfg["epochs"].get<std::size_t>();
    if (file_cfg.contains("seed")) config.seed = file_cfg["seed"].get<std::uint64_t>();
    if (file_cfg.contains("clip_norm")) config.clip_norm = file_cfg["clip_norm"].get<double>();
    if (file_cfg.contains("output_range")) {
        config.output_lo = file_cfg["output_range"].at(0).get<double>();
        config.output_hi = file_cfg["output_range"].at(1).get<double>();
    }

    if (!cli.variant.empty()) config.variant = variant_from_string(cli.variant);
    if (cmd->count("--seed")) config.seed = cli.seed;
    if (cmd->count("--epochs")) config.epochs = cli.epochs;
    if (cmd->count("--batch-size")) config.batch_size = cli.batch_size;
    if (cmd->count("--lr")) config.learning_rate = cli.lr;
    if (cmd->count("--beta")) config.beta = cli.beta;
    if (cmd->count("--gamma")) config.gamma = cli.gamma;
    if (cmd->count("--clip-norm")) config.clip_norm = cli.clip_norm;

    data.split_seed = cmd->count("--split-seed") ? data.split_seed : config.seed;
    const Dataset ds = data.load();

    config.input_dim = ds.feature_dim();
    if (config.num_codes == 0) config.num_codes = ds.num_classes();
    if (config.encoder_layers.empty()) {
        throw std::invalid_argument("config: encoder_layers missing (set them or use a preset)");
    }
    if (config.decoder_layers.empty()) {
        config.decoder_layers = mirror_decoder(config.encoder_layers, config.input_dim);
    }
    if (!file_cfg.contains("output_range")) {
        config.output_lo = ds.range_lo;
        config.output_hi = ds.range_hi;
    }
    config.image_rows = ds.image_rows;
    config.image_cols = ds.image_cols;
    config.validate();

    Rng rng(config.seed);
    TrainResult result = train(config, ds, nullptr, rng, &std::cout);

    fs::create_directories(cli.out_dir);
    save_checkpoint(result.model, &result.adam, (fs::path(cli.out_dir) / "checkpoint.json").string());
    write_history_csv(result.history, (fs::path(cli.out_dir) / "history.csv").string());
    std::cout << "checkpoint written to " << (fs::path(cli.out_dir) / "checkpoint.json").string()
              << '\n';
    return 0;
}

std::vector<std::string> code_names(const Model& model) {
    if (model.config.variant == Variant::supervised &&
        model.class_names.size() == model.config.num_codes) {
        return model.class_names;
    }
    std::vector<std::string> names;
    for (std::size_t i = 0; i < model.config.num_codes; ++i) {
        names.push_back("code" + std::to_string(i));
    }
    return names;
}

struct EvalCli {
    std::string model_path, out_path;
    std::uint64_t seed = 1;
    DataOptions data;
};

int run_eval(const EvalCli& cli, const CLI::App* cmd) {
    const Checkpoint ckpt = load_checkpoint(cli.model_path);
    DataOptions data = cli.data;
    data.split_seed = cmd->count("--split-seed") ? data.split_seed : cli.seed;
    const Dataset ds = data.load();
    const AnalysisReport report = evaluate(ckpt.model, ds);

    const fs::path out_path(cli.out_path);
    if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
    write_report_json(report, ds.class_names, out_path.string());
    const fs::path dir = out_path.has_parent_path() ? out_path.parent_path() : fs::path(".");
    write_confusion_csv(report.confusion, ds.class_names, code_names(ckpt.model),
                        (dir / "confusion.csv").string());
    write_distances_csv(report.distance_matrix, code_names(ckpt.model),
                        (dir / "distances.csv").string());
    std::cout << "perplexity=" << report.perplexity << " mse=" << report.mse
              << " accuracy=" << report.accuracy << '\n';
    return 0;
}

struct GenerateCli {
    std::string model_path, class_name, cov = "diagonal", out_dir;
    std::size_t count = 1;
    std::uint64_t seed = 1;
    DataOptions data;
};

int run_generate(const GenerateCli& cli, const CLI::App*) {
    const Checkpoint ckpt = load_checkpoint(cli.model_path);
    const Dataset ds = cli.data.load();

    std::optional<int> class_index;
    if (!cli.class_name.empty()) {
        const auto& names = ds.class_names;
        const auto it = std::find(names.begin(), names.end(), cli.class_name);
        if (it == names.end()) {
            throw std::invalid_argument("unknown class name '" + cli.class_name + "'");
        }
        class_index = static_cast<int>(it - names.begin());
    }
    const CovarianceMode mode =
        cli.cov == "full" ? CovarianceMode::full : CovarianceMode::diagonal;
    const ClassLatentStats stats = estimate_class_latent_stats(ckpt.model, ds, mode);

    Rng rng(cli.seed);
    const auto [samples, classes] = generate(ckpt.model, stats, class_index, cli.count, rng);

    fs::create_directories(cli.out_dir);
    std::vector<std::string> row_labels;
    for (int c : classes) row_labels.push_back(ds.class_names[static_cast<std::size_t>(c)]);
    write_samples_csv(samples, row_labels, "class",
                      (fs::path(cli.out_dir) / "samples.csv").string());
    if (ckpt.model.config.image_rows > 0 && ckpt.model.config.image_cols > 0) {
        for (std::size_t i = 0; i < samples.rows; ++i) {
            const double* row = samples.row_ptr(i);
            const std::string name = "sample_" + std::to_string(i) + "_" +
                                     sanitize_filename(row_labels[i]) + ".pgm";
            write_pgm(std::vector<double>(row, row + samples.cols), ckpt.model.config.image_rows,
                      ckpt.model.config.image_cols, ckpt.model.config.output_lo,
                      ckpt.model.config.output_hi, (fs::path(cli.out_dir) / name).string());
        }
    }
    std::cout << "wrote " << samples.rows << " samples to " << cli.out_dir << '\n';
    return 0;
}

struct CodesCli {
    std::string model_path, out_dir;
    std::uint64_t seed = 1;
};

int run_codes(const CodesCli& cli, const CLI::App*) {
    const Checkpoint ckpt = load_checkpoint(cli.model_path);
    const Model& model = ckpt.model;
    const std::vector<std::string> names = code_names(model);

    const Matrix prototypes = decode_codes(model);
    const Matrix dist = code_distance_matrix(model.embedding);

    fs::create_directories(cli.out_dir);
    write_samples_csv(prototypes, names, "code", (fs::path(cli.out_dir) / "prototypes.csv").string());
    if (model.config.image_rows > 0 && model.config.image_cols > 0) {
        for (std::size_t i = 0; i < prototypes.rows; ++i) {
            const double* row = prototypes.row_ptr(i);
            write_pgm(std::vector<double>(row, row + prototypes.cols), model.config.image_rows,
                      model.config.image_cols, model.config.output_lo, model.config.output_hi,
                      (fs::path(cli.out_dir) / (sanitize_filename(names[i]) + ".pgm")).string());
        }
    }
    write_distances_csv(dist, names, (fs::path(cli.out_dir) / "distances.csv").string());

    const PartnerGraph graph = nearest_partner_graph(dist, names);
    write_graph_dot(graph, (fs::path(cli.out_dir) / "graph.dot").string());

    std::vector<std::pair<int, int>> edges;
    for (const auto& e : graph.edges) edges.emplace_back(e.source, e.target);
    const UndirectedGraph ugraph = UndirectedGraph::from_edges(names.size(), edges);
    Rng rng(cli.seed);
    const CommunityPartition partition = louvain(ugraph, rng);
    write_graph_json(graph, partition.communities, partition.modularity,
                     (fs::path(cli.out_dir) / "graph.json").string());
    std::cout << "wrote code analyses to " << cli.out_dir << " (modularity="
              << partition.modularity << ")\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Supervised VQ-VAE trainer and analysis toolkit"};
    app.require_subcommand(1);

    TrainCli train_cli;
    CLI::App* train_cmd = app.add_subcommand("train", "train a model");
    train_cmd->add_option("--config", train_cli.config_path, "JSON config file");
    train_cmd->add_option("--variant", train_cli.variant, "supervised or baseline")
        ->check(CLI::IsMember({"supervised", "baseline"}));
    train_cmd->add_option("--seed", train_cli.seed, "run seed");
    train_cmd->add_option("--epochs", train_cli.epochs, "epoch count");
    train_cmd->add_option("--batch-size", train_cli.batch_size, "batch size");
    train_cmd->add_option("--lr", train_cli.lr, "learning rate");
    train_cmd->add_option("--beta", train_cli.beta, "commitment coefficient");
    train_cmd->add_option("--gamma", train_cli.gamma, "divergence coefficient");
    train_cmd->add_option("--clip-norm", train_cli.clip_norm, "gradient norm clip (0 = off)");
    train_cmd->add_option("--out", train_cli.out_dir, "output directory")->required();
    train_cli.data.add_flags(train_cmd);

    EvalCli eval_cli;
    CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
    eval_cmd->add_option("--model", eval_cli.model_path, "checkpoint file")->required();
    eval_cmd->add_option("--seed", eval_cli.seed, "seed (used for the data split)");
    eval_cmd->add_option("--out", eval_cli.out_path, "report JSON path")->required();
    eval_cli.data.add_flags(eval_cmd);

    GenerateCli gen_cli;
    CLI::App* gen_cmd = app.add_subcommand("generate", "sample new data from a trained model");
    gen_cmd->add_option("--model", gen_cli.model_path, "checkpoint file")->required();
    gen_cmd->add_option("--class", gen_cli.class_name, "class name (default: sample classes)");
    gen_cmd->add_option("--count", gen_cli.count, "number of samples")->required();
    gen_cmd->add_option("--cov", gen_cli.cov, "covariance mode")
        ->check(CLI::IsMember({"diagonal", "full"}));
    gen_cmd->add_option("--seed", gen_cli.seed, "sampling seed");
    gen_cmd->add_option("--out", gen_cli.out_dir, "output directory")->required();
    gen_cli.data.add_flags(gen_cmd);

    CodesCli codes_cli;
    CLI::App* codes_cmd = app.add_subcommand("codes", "decode codes and analyze their geometry");
    codes_cmd->add_option("--model", codes_cli.model_path, "checkpoint file")->required();
    codes_cmd->add_option("--seed", codes_cli.seed, "community detection seed");
    codes_cmd->add_option("--out", codes_cli.out_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (train_cmd->parsed()) return run_train(train_cli, train_cmd);
        if (eval_cmd->parsed()) return run_eval(eval_cli, eval_cmd);
        if (gen_cmd->parsed()) return run_generate(gen_cli, gen_cmd);
        if (codes_cmd->parsed()) return run_codes(codes_cli, codes_cmd);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
