// Copyright 2026 the qpcnn authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "qpc/train.hpp"

using namespace qpc;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("qpc_cfg_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(rand()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

// A small two-class quantum config over a synthetic IDX pair.
TrainConfig tiny_config(const TempDir& tmp) {
    TrainConfig c;
    c.dataset.name = "fashion_mnist";
    c.dataset.train_images = tmp.file("train_img");
    c.dataset.train_labels = tmp.file("train_lab");
    c.dataset.test_images = tmp.file("test_img");
    c.dataset.test_labels = tmp.file("test_lab");
    c.dataset.subset = {{0, 1}, 8, 4, 6, 6};
    c.architecture = {
        {.kind = "conv3x3", .channels = 2},
        {.kind = "relu"},
        {.kind = "qpconv", .n_qubits = 1, .n_circuits = 2, .n_blocks = 1},
        {.kind = "flatten"},
        {.kind = "dense", .channels = 2},
    };
    c.epochs = 2;
    c.batch_train = 4;
    c.seed = 7;
    c.out_dir = tmp.file("out");
    return c;
}

void write_fixture(const TempDir& tmp) {
    oracle::write_synthetic_idx_pair(tmp.file("train_img"), tmp.file("train_lab"), 24, 3);
    oracle::write_synthetic_idx_pair(tmp.file("test_img"), tmp.file("test_lab"), 12, 4);
}

}  // namespace

TEST_CASE("config serialization round trip is a fixed point") {
    TempDir tmp;
    TrainConfig c = tiny_config(tmp);
    c.architecture.push_back({.kind = "dropout", .rate = 0.25});
    std::swap(c.architecture[4], c.architecture[5]);  // dropout before dense
    c.lr0 = 0.005;
    c.record_timing = true;

    const std::string text = serialize_config(c);
    const TrainConfig back = parse_config(text);
    CHECK(serialize_config(back) == text);

    // Second round trip is identical too.
    CHECK(serialize_config(parse_config(serialize_config(back))) == text);

    CHECK(back.lr0 == 0.005);
    CHECK(back.epochs == 2);
    CHECK(back.seed == 7);
    CHECK(back.record_timing);
    REQUIRE(back.architecture.size() == 6);
    CHECK(back.architecture[2].kind == "qpconv");
    CHECK(back.architecture[2].n_qubits == 1);
    CHECK(back.architecture[4].rate == 0.25);
    CHECK(back.dataset.subset.classes == std::vector<std::size_t>{0, 1});
}

TEST_CASE("config parsing errors") {
    CHECK_THROWS_AS(parse_config("not json"), ConfigError);
    CHECK_THROWS_AS(parse_config("{}"), ConfigError);  // missing dataset
    CHECK_THROWS_AS(parse_config(R"({"dataset":{"name":"x"},"architecture":[{}]})"),
                    ConfigError);  // layer without kind
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("build_network validates and propagates shapes") {
    TempDir tmp;
    TrainConfig c = tiny_config(tmp);
    Network net = build_network(c, Shape{6, 6, 1}, 2);
    // conv3x3 -> 6x6x2, qpconv(2 circuits x 1 qubit) -> 6x6x2,
    // flatten -> 1x1x72, dense -> 1x1x2.
    const Shape out = net.check_shapes(Shape{6, 6, 1});
    CHECK(out.h == 1);
    CHECK(out.w == 1);
    CHECK(out.c == 2);
    CHECK(net.layers.size() == 5);

    // Unknown layer kind.
    TrainConfig bad = c;
    bad.architecture[1].kind = "mystery";
    CHECK_THROWS_AS(build_network(bad, Shape{6, 6, 1}, 2), ConfigError);

    // Missing terminal dense layer.
    TrainConfig nod = c;
    nod.architecture.pop_back();
    CHECK_THROWS_AS(build_network(nod, Shape{6, 6, 1}, 2), ConfigError);

    // Dense width must match the class count.
    CHECK_THROWS_AS(build_network(c, Shape{6, 6, 1}, 3), ConfigError);

    // qpconv capacity: 2 channels into a 1-qubit kernel works, 3 do not.
    TrainConfig cap = c;
    cap.architecture[0].channels = 3;
    CHECK_THROWS_AS(build_network(cap, Shape{6, 6, 1}, 2), ConfigError);

    // n_circuits derived from c_out.
    TrainConfig derived = c;
    derived.architecture[2].n_circuits = 0;
    derived.architecture[2].c_out = 3;
    derived.architecture[2].n_qubits = 2;
    Network dn = build_network(derived, Shape{6, 6, 1}, 2);
    CHECK(dn.check_shapes(Shape{6, 6, 1}).c == 2);
    const auto* qp = dynamic_cast<const QpconvLayer*>(dn.layers[2].get());
    REQUIRE(qp != nullptr);
    CHECK(qp->bank().c_out == 3);
    CHECK(qp->bank().kernels.size() == 2);
}

TEST_CASE("a tiny training run emits metrics, config, and checkpoint") {
    TempDir tmp;
    write_fixture(tmp);
    const TrainConfig c = tiny_config(tmp);
    const TrainResult r = run_training(c);

    REQUIRE(r.records.size() == 2);
    CHECK(r.records[0].epoch == 1);
    CHECK(r.records[1].lr < r.records[0].lr);  // cosine decay
    CHECK(r.records[0].seconds == 0.0);        // timing off by default
    for (const auto& rec : r.records) {
        CHECK(std::isfinite(rec.train_loss));
        CHECK(rec.train_acc >= 0.0);
        CHECK(rec.test_acc <= 1.0);
    }

    const std::string metrics = slurp(r.metrics_path);
    CHECK(metrics.rfind(std::string(kMetricsHeader) + "\n", 0) == 0);
    CHECK(std::count(metrics.begin(), metrics.end(), '\n') == 3);

    // config.json round-trips to the same config.
    const TrainConfig back = load_config(tmp.file("out") + "/config.json");
    CHECK(serialize_config(back) == serialize_config(c));

    // Checkpoint: 8-byte config hash, then one double per parameter plus
    // any auxiliary state (none in this architecture).
    const std::string ck = slurp(r.checkpoint_path);
    REQUIRE(ck.size() == 8 + 8 * r.param_count);
    std::uint64_t hash;
    std::memcpy(&hash, ck.data(), 8);
    CHECK(hash == fnv1a64(serialize_config(c)));
}

TEST_CASE("training is deterministic for a fixed seed") {
    TempDir tmp;
    write_fixture(tmp);
    TrainConfig a = tiny_config(tmp);
    a.out_dir = tmp.file("run_a");
    TrainConfig b = tiny_config(tmp);
    b.out_dir = tmp.file("run_b");
    const auto ra = run_training(a);
    const auto rb = run_training(b);

    CHECK(slurp(ra.metrics_path) == slurp(rb.metrics_path));
    // Checkpoints differ only in the config hash (out_dir is serialized).
    CHECK(slurp(ra.checkpoint_path).substr(8) == slurp(rb.checkpoint_path).substr(8));

    // A different seed changes the trajectory.
    TrainConfig d = tiny_config(tmp);
    d.out_dir = tmp.file("run_d");
    d.seed = 8;
    const auto rd = run_training(d);
    CHECK(slurp(ra.metrics_path) != slurp(rd.metrics_path));
}

TEST_CASE("compare and layers-sweep drivers") {
    TempDir tmp;
    write_fixture(tmp);
    TrainConfig q = tiny_config(tmp);
    q.epochs = 1;
    q.out_dir = tmp.file("cmp");

    TrainConfig cl = q;
    cl.architecture[2] = {.kind = "classical_pointwise", .channels = 2};

    const CompareResult cr = run_compare(q, cl);
    CHECK(fs::exists(tmp.file("cmp") + "/quantum_metrics.csv"));
    CHECK(fs::exists(tmp.file("cmp") + "/classical_metrics.csv"));
    CHECK(fs::exists(tmp.file("cmp") + "/compare_paired.csv"));
    CHECK(cr.summary.find("quantum: test_acc=") == 0);
    CHECK(cr.summary.find("| classical: test_acc=") != std::string::npos);

    TrainConfig mismatched = cl;
    mismatched.seed = q.seed + 1;
    CHECK_THROWS_AS(run_compare(q, mismatched), ConfigError);

    TrainConfig sweep = q;
    sweep.out_dir = tmp.file("sweep");
    const auto rs = run_layers_sweep(sweep, {1, 2});
    REQUIRE(rs.size() == 2);
    CHECK(fs::exists(tmp.file("sweep") + "/metrics_L1.csv"));
    CHECK(fs::exists(tmp.file("sweep") + "/metrics_L2.csv"));
    // Depth 2 has more trainable parameters than depth 1.
    CHECK(rs[1].param_count > rs[0].param_count);
    CHECK_THROWS_AS(run_layers_sweep(sweep, {}), ConfigError);
}
