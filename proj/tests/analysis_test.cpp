#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "svqvae/analysis.hpp"

using namespace svqvae;

namespace {

// model with an identity encoder (latents = inputs) and an exactly invertible
// decoder on the two class centers +-0.5: tanh(a * c + 0) = c
Model two_blob_model() {
    ModelConfig config;
    config.input_dim = 1;
    config.encoder_layers = {{1, Activation::linear}};
    config.code_dim = 1;
    config.num_codes = 2;
    config.decoder_layers = {{1, Activation::tanh}};
    Rng rng(1);
    Model model = init_model(config, rng);
    model.encoder[0].weights(0, 0) = 1.0;
    model.encoder[0].bias[0] = 0.0;
    model.embedding(0, 0) = -0.5;
    model.embedding(1, 0) = 0.5;
    model.decoder[0].weights(0, 0) = std::atanh(0.5) / 0.5;
    model.decoder[0].bias[0] = 0.0;
    model.class_names = {"neg", "pos"};
    return model;
}

Dataset two_blob_dataset(std::size_t per_class) {
    Dataset ds;
    ds.features = Matrix(2 * per_class, 1);
    for (std::size_t i = 0; i < per_class; ++i) {
        ds.features(i, 0) = -0.5;
        ds.labels.push_back(0);
    }
    for (std::size_t i = per_class; i < 2 * per_class; ++i) {
        ds.features(i, 0) = 0.5;
        ds.labels.push_back(1);
    }
    ds.class_names = {"neg", "pos"};
    ds.range_lo = -1.0;
    ds.range_hi = 1.0;
    return ds;
}

}  // namespace

TEST_CASE("perplexity extremes and hand values") {
    std::vector<int> uniform;
    for (int c = 0; c < 10; ++c)
        for (int i = 0; i < 7; ++i) uniform.push_back(c);
    CHECK(perplexity(uniform, 10) == doctest::Approx(10.0).epsilon(1e-12));

    const std::vector<int> collapsed(50, 3);
    CHECK(perplexity(collapsed, 10) == 1.0);

    const std::vector<int> half{0, 1, 0, 1};
    CHECK(perplexity(half, 2) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(perplexity(half, 10) == doctest::Approx(2.0).epsilon(1e-12));

    CHECK_THROWS_AS(perplexity({}, 4), std::invalid_argument);
    CHECK_THROWS_AS(perplexity({5}, 4), std::invalid_argument);
}

TEST_CASE("perplexity stays within [1, Y] and hits Y only at uniformity") {
    Rng rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<int> assignments;
        const std::size_t y = 2 + rng.next_below(8);
        const std::size_t n = 1 + rng.next_below(200);
        for (std::size_t i = 0; i < n; ++i) {
            assignments.push_back(static_cast<int>(rng.next_below(y)));
        }
        const double p = perplexity(assignments, y);
        CHECK(p >= 1.0 - 1e-12);
        CHECK(p <= double(y) + 1e-12);
    }
}

TEST_CASE("evaluate on a perfectly-coded zero-variance dataset") {
    const Model model = two_blob_model();
    const Dataset ds = two_blob_dataset(8);
    const AnalysisReport report = evaluate(model, ds);
    CHECK(report.accuracy == 1.0);
    CHECK(report.mse <= 1e-16);
    CHECK(report.perplexity == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(report.confusion(0, 0) == 8.0);
    CHECK(report.confusion(1, 1) == 8.0);
    CHECK(report.confusion(0, 1) == 0.0);
}

TEST_CASE("evaluate confusion rows sum to class counts; accuracy equals its trace") {
    ModelConfig config;
    config.input_dim = 3;
    config.encoder_layers = {{4, Activation::tanh}, {2, Activation::linear}};
    config.code_dim = 2;
    config.num_codes = 4;
    config.decoder_layers = {{3, Activation::tanh}};
    Rng rng(5);
    Model model = init_model(config, rng);

    Dataset ds;
    const std::size_t n = 40;
    ds.features = Matrix(n, 3);
    for (double& v : ds.features.data) v = 2.0 * rng.next_double() - 1.0;
    for (std::size_t i = 0; i < n; ++i) ds.labels.push_back(static_cast<int>(rng.next_below(4)));
    ds.class_names = {"a", "b", "c", "d"};
    ds.range_lo = -1.0;
    ds.range_hi = 1.0;

    const AnalysisReport report = evaluate(model, ds);
    const auto counts = ds.class_counts();
    double trace = 0.0;
    for (std::size_t c = 0; c < 4; ++c) {
        double row_sum = 0.0;
        for (std::size_t k = 0; k < 4; ++k) row_sum += report.confusion(c, k);
        CHECK(row_sum == double(counts[c]));
        trace += report.confusion(c, c);
    }
    CHECK(report.accuracy == trace / double(n));

    Dataset wrong = ds;
    wrong.class_names.push_back("e");
    CHECK_THROWS_AS(evaluate(model, wrong), std::invalid_argument);
}

TEST_CASE("code distance matrix geometry") {
    const Matrix codes{{0.0, 0.0}, {3.0, 4.0}, {1.0, 1.0}};
    const Matrix d = code_distance_matrix(codes);
    CHECK(d(0, 0) == 0.0);
    CHECK(d(1, 1) == 0.0);
    CHECK(d(0, 1) == 5.0);  // 3-4-5 triangle
    CHECK(d(1, 0) == 5.0);

    Rng rng(7);
    Matrix random_codes(6, 5);
    for (double& v : random_codes.data) v = 2.0 * rng.next_double() - 1.0;
    const Matrix rd = code_distance_matrix(random_codes);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(rd(i, i) == 0.0);
        for (std::size_t j = 0; j < 6; ++j) {
            CHECK(rd(i, j) == rd(j, i));
            for (std::size_t k = 0; k < 6; ++k) {
                CHECK(rd(i, j) <= rd(i, k) + rd(k, j) + 1e-9);
            }
        }
    }
}

TEST_CASE("decode_codes emits one in-range prototype per code") {
    ModelConfig config;
    config.input_dim = 4;
    config.encoder_layers = {{3, Activation::tanh}};
    config.code_dim = 3;
    config.num_codes = 5;
    config.decoder_layers = {{4, Activation::tanh}};
    config.output_lo = -10.0;
    config.output_hi = 10.0;
    Rng rng(11);
    const Model model = init_model(config, rng);
    const Matrix protos = decode_codes(model);
    CHECK(protos.rows == 5);
    CHECK(protos.cols == 4);
    for (double v : protos.data) {
        CHECK(v >= -10.0);
        CHECK(v <= 10.0);
    }
}

TEST_CASE("class mean oracle hand cases") {
    Dataset train;
    train.features = Matrix{{0.0}, {2.0}, {5.0}};
    train.labels = {0, 0, 1};
    train.class_names = {"a", "b"};
    train.range_lo = 0.0;
    train.range_hi = 5.0;

    // eval on the same two-point class: each point is 1 away from the mean
    Dataset eval_ds = train;
    const ClassMeanOracle oracle = class_mean_oracle(train, eval_ds);
    CHECK(oracle.class_means(0, 0) == 1.0);
    CHECK(oracle.class_means(1, 0) == 5.0);
    CHECK(oracle.lower_bound_mse == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

    // zero-variance data: bound is exactly zero
    Dataset flat;
    flat.features = Matrix{{0.5}, {0.5}};
    flat.labels = {0, 0};
    flat.class_names = {"a"};
    flat.range_lo = 0.0;
    flat.range_hi = 1.0;
    CHECK(class_mean_oracle(flat, flat).lower_bound_mse == 0.0);

    // an eval class unseen in train is an error
    Dataset bad_eval = train;
    bad_eval.class_names = {"a", "b", "c"};
    bad_eval.labels = {0, 0, 2};
    CHECK_THROWS_AS(class_mean_oracle(train, bad_eval), std::invalid_argument);
}

TEST_CASE("nearest partner graph (hand case, degrees, reciprocity)") {
    // d(0,1)=1, d(0,2)=2, d(1,2)=3 -> edges 0->1, 1->0, 2->0
    const Matrix d{{0.0, 1.0, 2.0}, {1.0, 0.0, 3.0}, {2.0, 3.0, 0.0}};
    const PartnerGraph graph = nearest_partner_graph(d, {"x", "y", "z"});
    REQUIRE(graph.edges.size() == 3);
    CHECK(graph.edges[0].source == 0);
    CHECK(graph.edges[0].target == 1);
    CHECK(graph.edges[0].distance == 1.0);
    CHECK(graph.edges[1].source == 1);
    CHECK(graph.edges[1].target == 0);
    CHECK(graph.edges[2].source == 2);
    CHECK(graph.edges[2].target == 0);

    // out-degree is one per node by construction; check no self edges on random input
    Rng rng(13);
    Matrix codes(9, 4);
    for (double& v : codes.data) v = 2.0 * rng.next_double() - 1.0;
    const Matrix rd = code_distance_matrix(codes);
    std::vector<std::string> names;
    for (int i = 0; i < 9; ++i) names.push_back("n" + std::to_string(i));
    const PartnerGraph rg = nearest_partner_graph(rd, names);
    CHECK(rg.edges.size() == 9);
    for (std::size_t i = 0; i < 9; ++i) {
        CHECK(rg.edges[i].source == int(i));
        CHECK(rg.edges[i].target != int(i));
    }

    CHECK_THROWS_AS(nearest_partner_graph(Matrix(1, 1), {"solo"}), std::invalid_argument);
}
