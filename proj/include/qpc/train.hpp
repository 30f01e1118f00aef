// Copyright 2026 the qpcnn authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "qpc/config.hpp"
#include "qpc/data.hpp"
#include "qpc/network.hpp"

namespace qpc {

struct MetricsRecord {
    std::size_t epoch;  // 1-based
    double train_loss, train_acc, test_loss, test_acc, lr, seconds;
};

struct TrainResult {
    std::vector<MetricsRecord> records;
    std::size_t param_count = 0;
    std::string metrics_path;
    std::string checkpoint_path;
};

inline constexpr const char* kMetricsHeader =
    "epoch,train_loss,train_acc,test_loss,test_acc,lr,seconds";

namespace detail {

inline std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

inline std::string metrics_row(const MetricsRecord& r) {
    return std::to_string(r.epoch) + "," + fmt9(r.train_loss) + "," + fmt9(r.train_acc) +
           "," + fmt9(r.test_loss) + "," + fmt9(r.test_acc) + "," + fmt9(r.lr) + "," +
           fmt9(r.seconds);
}

inline void write_le_double(std::ofstream& f, double v) {
    static_assert(sizeof(double) == 8);
    // Little-endian host assumed (checked at startup on x86/arm builds).
    f.write(reinterpret_cast<const char*>(&v), 8);
}

}  // namespace detail

inline std::pair<Dataset, Dataset> load_datasets(const TrainConfig& c) {
    Dataset train, test;
    if (c.dataset.name == "fashion_mnist") {
        train = load_idx(c.dataset.train_images, c.dataset.train_labels);
        test = load_idx(c.dataset.test_images, c.dataset.test_labels);
    } else if (c.dataset.name == "cifar10") {
        train = load_cifar10(c.dataset.cifar_train);
        test = load_cifar10(c.dataset.cifar_test);
    } else {
        throw ConfigError("unknown dataset: " + c.dataset.name);
    }
    const SubsetSpec& s = c.dataset.subset;
    if (!s.classes.empty()) {
        const std::size_t th = s.height ? s.height : train.images[0].height;
        const std::size_t tw = s.width ? s.width : train.images[0].width;
        train = desk_subset(train, s.classes, s.per_class_train, th, tw,
                            mix_seed(c.seed, 0x7472));
        test = desk_subset(test, s.classes, s.per_class_test, th, tw,
                           mix_seed(c.seed, 0x7465));
    }
    return {std::move(train), std::move(test)};
}

struct EvalResult {
    double loss = 0.0, accuracy = 0.0;
};

inline EvalResult evaluate(Network& net, const Dataset& ds, std::size_t batch_size,
                           unsigned workers) {
    LayerContext ctx{.training = false, .workers = workers, .rng = nullptr};
    EvalResult r;
    for (std::size_t i = 0; i < ds.images.size(); i += batch_size) {
        Batch in;
        for (std::size_t s = i; s < std::min(ds.images.size(), i + batch_size); ++s)
            in.push_back(ds.images[s]);
        const Batch logits = net.forward(in, ctx);
        for (std::size_t b = 0; b < in.size(); ++b) {
            const auto lr = softmax_cross_entropy(logits[b].data, ds.labels[i + b]);
            r.loss += lr.loss;
            const std::size_t pred =
                std::max_element(logits[b].data.begin(), logits[b].data.end()) -
                logits[b].data.begin();
            if (pred == ds.labels[i + b]) r.accuracy += 1.0;
        }
    }
    r.loss /= static_cast<double>(ds.images.size());
    r.accuracy /= static_cast<double>(ds.images.size());
    return r;
}

/// The full epoch loop: shuffle, forward, loss, backward, Adam step with
/// the cosine schedule, per-epoch test evaluation, metrics + checkpoint
/// emission. Deterministic for a fixed (config, seed, workers).
inline TrainResult run_training(const TrainConfig& c,
                                const std::string& metrics_name = "metrics.csv",
                                const std::string& checkpoint_name = "checkpoint.bin") {
    auto [train, test] = load_datasets(c);
    const std::size_t n_classes = train.n_classes ? train.n_classes : 10;
    const Shape in_shape{train.images[0].height, train.images[0].width,
                         train.images[0].channels};
    Network net = build_network(c, in_shape, n_classes);

    // One Adam state per trainable layer, flat parameter addressing.
    std::vector<AdamState> opt(net.layers.size());
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        opt[i].beta1 = c.beta1;
        opt[i].beta2 = c.beta2;
        opt[i].epsilon = c.epsilon;
        opt[i].init(net.layers[i]->param_count());
    }

    std::filesystem::create_directories(c.out_dir);
    const std::string metrics_path = c.out_dir + "/" + metrics_name;
    const std::string checkpoint_path = c.out_dir + "/" + checkpoint_name;
    const std::string config_text = serialize_config(c);
    {
        std::ofstream cf(c.out_dir + "/config.json");
        cf << config_text;
    }
    std::ofstream mf(metrics_path);
    mf << kMetricsHeader << "\n";

    std::mt19937_64 dropout_rng(mix_seed(c.seed, 0x64726f70));
    TrainResult result;
    result.param_count = net.param_count();
    result.metrics_path = metrics_path;
    result.checkpoint_path = checkpoint_path;

    for (std::size_t epoch = 0; epoch < c.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        const double lr = c.cosine ? cosine_lr(epoch, c.epochs, c.lr0) : c.lr0;
        double ep_loss = 0.0, ep_correct = 0.0;

        for (const auto& idx : batches(train.images.size(), c.batch_train, c.seed, epoch)) {
            Batch in;
            in.reserve(idx.size());
            for (std::size_t s : idx) in.push_back(train.images[s]);
            LayerContext ctx{.training = true, .workers = c.workers, .rng = &dropout_rng};
            const Batch logits = net.forward(in, ctx);

            Batch upstream;
            upstream.reserve(idx.size());
            const double inv_n = 1.0 / static_cast<double>(idx.size());
            for (std::size_t b = 0; b < idx.size(); ++b) {
                const auto lres =
                    softmax_cross_entropy(logits[b].data, train.labels[idx[b]]);
                ep_loss += lres.loss;
                const std::size_t pred =
                    std::max_element(logits[b].data.begin(), logits[b].data.end()) -
                    logits[b].data.begin();
                if (pred == train.labels[idx[b]]) ep_correct += 1.0;
                FeatureTensor g(1, 1, lres.grad.size());
                for (std::size_t k = 0; k < lres.grad.size(); ++k)
                    g.data[k] = lres.grad[k] * inv_n;
                upstream.push_back(std::move(g));
            }
            net.backward(upstream);

            for (std::size_t i = 0; i < net.layers.size(); ++i) {
                const std::size_t n = net.layers[i]->param_count();
                if (n == 0) continue;
                std::vector<double> p(n), g(n);
                net.layers[i]->get_params(p);
                net.layers[i]->get_grads(g);
                adam_step(opt[i], p, g, lr);
                net.layers[i]->set_params(p);
            }
        }

        const EvalResult ev = evaluate(net, test, c.batch_test, c.workers);
        const auto t1 = std::chrono::steady_clock::now();
        MetricsRecord rec{
            .epoch = epoch + 1,
            .train_loss = ep_loss / static_cast<double>(train.images.size()),
            .train_acc = ep_correct / static_cast<double>(train.images.size()),
            .test_loss = ev.loss,
            .test_acc = ev.accuracy,
            .lr = lr,
            .seconds = c.record_timing
                           ? std::chrono::duration<double>(t1 - t0).count()
                           : 0.0};
        mf << detail::metrics_row(rec) << "\n";
        mf.flush();
        result.records.push_back(rec);
    }
    mf.close();

    std::ofstream ck(checkpoint_path, std::ios::binary);
    const std::uint64_t hash = fnv1a64(config_text);
    ck.write(reinterpret_cast<const char*>(&hash), 8);
    std::vector<double> aux;
    for (const auto& l : net.layers) {
        std::vector<double> p(l->param_count());
        l->get_params(p);
        for (double v : p) detail::write_le_double(ck, v);
        l->append_aux_state(aux);
    }
    for (double v : aux) detail::write_le_double(ck, v);
    return result;
}

struct CompareResult {
    TrainResult quantum, classical;
    std::string summary;
};

/// Trains the quantum and classical variants side by side and emits
/// paired per-epoch metrics plus a one-line summary.
inline CompareResult run_compare(const TrainConfig& quantum, const TrainConfig& classical) {
    if (quantum.seed != classical.seed)
        throw ConfigError("compare: configs must share the seed");
    if (quantum.dataset.name != classical.dataset.name)
        throw ConfigError("compare: configs must share the dataset");
    CompareResult r;
    r.quantum = run_training(quantum, "quantum_metrics.csv", "quantum_checkpoint.bin");
    TrainConfig cl = classical;
    cl.out_dir = quantum.out_dir;  // paired outputs live together
    r.classical = run_training(cl, "classical_metrics.csv", "classical_checkpoint.bin");

    std::ofstream pf(quantum.out_dir + "/compare_paired.csv");
    pf << "epoch,q_train_loss,q_train_acc,q_test_loss,q_test_acc,"
          "c_train_loss,c_train_acc,c_test_loss,c_test_acc\n";
    for (std::size_t e = 0; e < r.quantum.records.size(); ++e) {
        const auto& q = r.quantum.records[e];
        const auto& cc = r.classical.records[e];
        pf << q.epoch << "," << detail::fmt9(q.train_loss) << ","
           << detail::fmt9(q.train_acc) << "," << detail::fmt9(q.test_loss) << ","
           << detail::fmt9(q.test_acc) << "," << detail::fmt9(cc.train_loss) << ","
           << detail::fmt9(cc.train_acc) << "," << detail::fmt9(cc.test_loss) << ","
           << detail::fmt9(cc.test_acc) << "\n";
    }

    const double qa = r.quantum.records.empty() ? 0.0 : r.quantum.records.back().test_acc;
    const double ca =
        r.classical.records.empty() ? 0.0 : r.classical.records.back().test_acc;
    r.summary = "quantum: test_acc=" + detail::fmt9(qa) +
                " params=" + std::to_string(r.quantum.param_count) +
                " | classical: test_acc=" + detail::fmt9(ca) +
                " params=" + std::to_string(r.classical.param_count);
    std::ofstream sf(quantum.out_dir + "/compare_summary.txt");
    sf << r.summary << "\n";
    return r;
}

/// Repeats training varying only the entangling depth of every qpconv
/// layer; one metrics file per depth.
inline std::vector<TrainResult> run_layers_sweep(const TrainConfig& base,
                                                 const std::vector<std::size_t>& depths) {
    if (depths.empty()) throw ConfigError("layers-sweep: depth list is empty");
    std::vector<TrainResult> results;
    for (std::size_t L : depths) {
        TrainConfig c = base;
        for (auto& l : c.architecture)
            if (l.kind == "qpconv") l.n_blocks = L;
        results.push_back(run_training(c, "metrics_L" + std::to_string(L) + ".csv",
                                       "checkpoint_L" + std::to_string(L) + ".bin"));
    }
    return results;
}

}  // namespace qpc
