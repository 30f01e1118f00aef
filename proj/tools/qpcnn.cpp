// Copyright 2026 the qpcnn authors
// SPDX-License-Identifier: Apache-2.0
//
// Training and benchmark harness for quantum pointwise convolution models.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qpc/train.hpp"
#include "qpc/verify.hpp"

namespace {

struct Overrides {
    std::string config_path;
    std::int64_t seed = -1;
    int workers = 0;
    std::string out_dir;
    std::int64_t epochs = -1;
};

void add_override_flags(CLI::App* cmd, Overrides& ov, bool config_required = true) {
    auto* c = cmd->add_option("--config", ov.config_path, "run configuration (JSON)");
    if (config_required) c->required();
    cmd->add_option("--seed", ov.seed, "override the config seed");
    cmd->add_option("--workers", ov.workers, "override the worker count");
    cmd->add_option("--out", ov.out_dir, "override the output directory");
    cmd->add_option("--epochs", ov.epochs, "override the epoch count");
}

qpc::TrainConfig load_with_overrides(const Overrides& ov) {
    qpc::TrainConfig c = qpc::load_config(ov.config_path);
    if (ov.seed >= 0) c.seed = static_cast<std::uint64_t>(ov.seed);
    if (ov.workers > 0) c.workers = static_cast<unsigned>(ov.workers);
    if (!ov.out_dir.empty()) c.out_dir = ov.out_dir;
    if (ov.epochs >= 0) c.epochs = static_cast<std::size_t>(ov.epochs);
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quantum pointwise convolution trainer"};
    app.require_subcommand(1);

    Overrides train_ov, compare_ov, sweep_ov;
    std::string classical_config;
    std::vector<std::size_t> depths{1, 2, 3, 4};
    bool corrupt_rx = false;

    CLI::App* train_cmd = app.add_subcommand("train", "train one model");
    add_override_flags(train_cmd, train_ov);

    CLI::App* compare_cmd =
        app.add_subcommand("compare", "train quantum and classical variants");
    add_override_flags(compare_cmd, compare_ov);
    compare_cmd->add_option("--classical-config", classical_config,
                            "classical variant configuration (JSON)")
        ->required();

    CLI::App* sweep_cmd =
        app.add_subcommand("layers-sweep", "train at several entangling depths");
    add_override_flags(sweep_cmd, sweep_ov);
    sweep_cmd->add_option("--layers", depths, "entangling depths to sweep");

    CLI::App* verify_cmd = app.add_subcommand("verify", "run the built-in oracle suites");
    verify_cmd->add_flag("--corrupt-rx", corrupt_rx)->group("");  // mutation-test hook

    CLI11_PARSE(app, argc, argv);

    try {
        if (train_cmd->parsed()) {
            const qpc::TrainConfig c = load_with_overrides(train_ov);
            const qpc::TrainResult r = qpc::run_training(c);
            std::printf("trained %zu epochs, %zu parameters\n", r.records.size(),
                        r.param_count);
            if (!r.records.empty())
                std::printf("final: train_loss=%.6f test_acc=%.4f\n",
                            r.records.back().train_loss, r.records.back().test_acc);
            std::printf("metrics: %s\ncheckpoint: %s\n", r.metrics_path.c_str(),
                        r.checkpoint_path.c_str());
        } else if (compare_cmd->parsed()) {
            const qpc::TrainConfig q = load_with_overrides(compare_ov);
            qpc::TrainConfig c = qpc::load_config(classical_config);
            c.seed = q.seed;
            c.workers = q.workers;
            c.epochs = q.epochs;
            const qpc::CompareResult r = qpc::run_compare(q, c);
            std::printf("%s\n", r.summary.c_str());
        } else if (sweep_cmd->parsed()) {
            const qpc::TrainConfig c = load_with_overrides(sweep_ov);
            const auto results = qpc::run_layers_sweep(c, depths);
            for (std::size_t i = 0; i < depths.size(); ++i)
                std::printf("L=%zu params=%zu metrics=%s\n", depths[i],
                            results[i].param_count, results[i].metrics_path.c_str());
        } else if (verify_cmd->parsed()) {
            const bool ok = qpc::print_verify_report(qpc::run_verify(corrupt_rx));
            return ok ? 0 : 3;
        }
    } catch (const qpc::ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "runtime error: %s\n", e.what());
        return 2;
    }
    return 0;
}
