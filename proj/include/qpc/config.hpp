// Copyright 2026 the qpcnn authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qpc/network.hpp"
#include "qpc/util.hpp"

namespace qpc {

using json = nlohmann::ordered_json;

struct LayerSpec {
    std::string kind;
    std::size_t channels = 0;      // conv3x3 / classical_pointwise / dense units
    double rate = 0.5;             // dropout
    std::size_t n_qubits = 0;      // qpconv
    std::size_t n_circuits = 0;    // qpconv; derived from c_out when omitted
    std::size_t n_blocks = 1;      // qpconv entangling depth L
    std::string entangler = "cnot";
    std::size_t c_out = 0;         // qpconv target channels, 0 = n_circuits*n_qubits
};

struct SubsetSpec {
    std::vector<std::size_t> classes;
    std::size_t per_class_train = 0;  // 0 = keep everything
    std::size_t per_class_test = 0;
    std::size_t height = 0, width = 0;  // 0 = native size
};

struct DatasetSpec {
    std::string name;  // "fashion_mnist" (IDX) or "cifar10" (binary batches)
    std::string train_images, train_labels, test_images, test_labels;
    std::vector<std::string> cifar_train, cifar_test;
    SubsetSpec subset;
};

struct TrainConfig {
    DatasetSpec dataset;
    std::vector<LayerSpec> architecture;
    double lr0 = 0.01, beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8;
    std::size_t epochs = 15;
    bool cosine = true;
    std::size_t batch_train = 32, batch_test = 64;
    std::uint64_t seed = 42;
    unsigned workers = 1;
    std::string out_dir = "out";
    // Off by default so identical runs yield byte-identical metrics files.
    bool record_timing = false;
};

inline json to_json(const TrainConfig& c) {
    json j;
    json d;
    d["name"] = c.dataset.name;
    if (!c.dataset.train_images.empty()) d["train_images"] = c.dataset.train_images;
    if (!c.dataset.train_labels.empty()) d["train_labels"] = c.dataset.train_labels;
    if (!c.dataset.test_images.empty()) d["test_images"] = c.dataset.test_images;
    if (!c.dataset.test_labels.empty()) d["test_labels"] = c.dataset.test_labels;
    if (!c.dataset.cifar_train.empty()) d["cifar_train"] = c.dataset.cifar_train;
    if (!c.dataset.cifar_test.empty()) d["cifar_test"] = c.dataset.cifar_test;
    if (!c.dataset.subset.classes.empty()) {
        json s;
        s["classes"] = c.dataset.subset.classes;
        s["per_class_train"] = c.dataset.subset.per_class_train;
        s["per_class_test"] = c.dataset.subset.per_class_test;
        s["height"] = c.dataset.subset.height;
        s["width"] = c.dataset.subset.width;
        d["subset"] = s;
    }
    j["dataset"] = d;

    json arch = json::array();
    for (const auto& l : c.architecture) {
        json e;
        e["kind"] = l.kind;
        if (l.kind == "conv3x3" || l.kind == "classical_pointwise" || l.kind == "dense")
            e["channels"] = l.channels;
        if (l.kind == "dropout") e["rate"] = l.rate;
        if (l.kind == "qpconv") {
            e["n_qubits"] = l.n_qubits;
            e["n_circuits"] = l.n_circuits;
            e["blocks"] = l.n_blocks;
            e["entangler"] = l.entangler;
            if (l.c_out) e["c_out"] = l.c_out;
        }
        arch.push_back(e);
    }
    j["architecture"] = arch;
    j["optimizer"] = {{"lr0", c.lr0}, {"beta1", c.beta1}, {"beta2", c.beta2},
                      {"epsilon", c.epsilon}};
    j["schedule"] = {{"epochs", c.epochs}, {"cosine", c.cosine}};
    j["batch"] = {{"train", c.batch_train}, {"test", c.batch_test}};
    j["seed"] = c.seed;
    j["workers"] = c.workers;
    j["out_dir"] = c.out_dir;
    j["record_timing"] = c.record_timing;
    return j;
}

inline TrainConfig config_from_json(const json& j) {
    TrainConfig c;
    try {
        const json& d = j.at("dataset");
        c.dataset.name = d.at("name").get<std::string>();
        c.dataset.train_images = d.value("train_images", "");
        c.dataset.train_labels = d.value("train_labels", "");
        c.dataset.test_images = d.value("test_images", "");
        c.dataset.test_labels = d.value("test_labels", "");
        c.dataset.cifar_train = d.value("cifar_train", std::vector<std::string>{});
        c.dataset.cifar_test = d.value("cifar_test", std::vector<std::string>{});
        if (d.contains("subset")) {
            const json& s = d["subset"];
            c.dataset.subset.classes = s.value("classes", std::vector<std::size_t>{});
            c.dataset.subset.per_class_train = s.value("per_class_train", std::size_t{0});
            c.dataset.subset.per_class_test = s.value("per_class_test", std::size_t{0});
            c.dataset.subset.height = s.value("height", std::size_t{0});
            c.dataset.subset.width = s.value("width", std::size_t{0});
        }
        for (const json& e : j.at("architecture")) {
            LayerSpec l;
            l.kind = e.at("kind").get<std::string>();
            l.channels = e.value("channels", std::size_t{0});
            l.rate = e.value("rate", 0.5);
            l.n_qubits = e.value("n_qubits", std::size_t{0});
            l.n_circuits = e.value("n_circuits", std::size_t{0});
            l.n_blocks = e.value("blocks", std::size_t{1});
            l.entangler = e.value("entangler", std::string("cnot"));
            l.c_out = e.value("c_out", std::size_t{0});
            c.architecture.push_back(l);
        }
        if (j.contains("optimizer")) {
            const json& o = j["optimizer"];
            c.lr0 = o.value("lr0", 0.01);
            c.beta1 = o.value("beta1", 0.9);
            c.beta2 = o.value("beta2", 0.999);
            c.epsilon = o.value("epsilon", 1e-8);
        }
        if (j.contains("schedule")) {
            c.epochs = j["schedule"].value("epochs", std::size_t{15});
            c.cosine = j["schedule"].value("cosine", true);
        }
        if (j.contains("batch")) {
            c.batch_train = j["batch"].value("train", std::size_t{32});
            c.batch_test = j["batch"].value("test", std::size_t{64});
        }
        c.seed = j.value("seed", std::uint64_t{42});
        c.workers = j.value("workers", 1u);
        c.out_dir = j.value("out_dir", "out");
        c.record_timing = j.value("record_timing", false);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return c;
}

inline std::string serialize_config(const TrainConfig& c) { return to_json(c).dump(2) + "\n"; }

inline TrainConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return config_from_json(j);
}

inline TrainConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    return parse_config({std::istreambuf_iterator<char>(f),
                         std::istreambuf_iterator<char>()});
}

/// Layer-by-layer validation plus network construction. Per-layer weight
/// seeds are derived from the run seed and the layer position.
inline Network build_network(const TrainConfig& c, Shape input, std::size_t n_classes) {
    Network net;
    Shape s = input;
    std::size_t dense_count = 0;
    for (std::size_t idx = 0; idx < c.architecture.size(); ++idx) {
        const LayerSpec& l = c.architecture[idx];
        const std::uint64_t lseed = mix_seed(c.seed, 0x10000 + idx);
        if (l.kind == "conv3x3") {
            if (l.channels == 0) throw ConfigError("conv3x3 needs 'channels'");
            net.layers.push_back(std::make_unique<Conv3x3Layer>(s.c, l.channels, lseed));
        } else if (l.kind == "relu") {
            net.layers.push_back(std::make_unique<ReluLayer>());
        } else if (l.kind == "bn") {
            net.layers.push_back(std::make_unique<BatchNormLayer>(s.c));
        } else if (l.kind == "dropout") {
            net.layers.push_back(std::make_unique<DropoutLayer>(l.rate));
        } else if (l.kind == "flatten") {
            net.layers.push_back(std::make_unique<FlattenLayer>());
        } else if (l.kind == "classical_pointwise") {
            if (l.channels == 0) throw ConfigError("classical_pointwise needs 'channels'");
            net.layers.push_back(std::make_unique<PointwiseLayer>(
                "classical_pointwise", s.c, l.channels, lseed));
        } else if (l.kind == "dense") {
            const std::size_t units = l.channels ? l.channels : n_classes;
            net.layers.push_back(
                std::make_unique<PointwiseLayer>("dense", s.c, units, lseed));
            ++dense_count;
        } else if (l.kind == "qpconv") {
            if (l.n_qubits == 0) throw ConfigError("qpconv needs 'n_qubits'");
            std::size_t n_circuits = l.n_circuits;
            if (n_circuits == 0) {
                if (l.c_out == 0)
                    throw ConfigError("qpconv needs 'n_circuits' or 'c_out'");
                n_circuits = (l.c_out + l.n_qubits - 1) / l.n_qubits;
            }
            if (required_qubits(s.c) > l.n_qubits)
                throw ConfigError("qpconv at layer " + std::to_string(idx) +
                                  ": " + std::to_string(s.c) +
                                  " channels exceed " + std::to_string(l.n_qubits) +
                                  "-qubit capacity");
            net.layers.push_back(std::make_unique<QpconvLayer>(
                make_kernel_bank(n_circuits, l.n_qubits, l.n_blocks,
                                 entangler_from_string(l.entangler), lseed, l.c_out)));
        } else {
            throw ConfigError("unknown layer kind: " + l.kind);
        }
        s = net.layers.back()->output_shape(s);
    }
    if (dense_count != 1 || net.layers.back()->kind() != "dense")
        throw ConfigError("architecture must end with exactly one dense layer");
    const Shape out = net.check_shapes(input);
    if (out.c != n_classes)
        throw ConfigError("dense output width " + std::to_string(out.c) +
                          " does not match class count " + std::to_string(n_classes));
    return net;
}

}  // namespace qpc
