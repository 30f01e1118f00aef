// Copyright 2026 the qpcnn authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "qpc/circuit.hpp"
#include "qpc/gradient.hpp"
#include "qpc/util.hpp"

namespace qpc {

/// Real H x W x C activation tensor, row-major with channels innermost.
struct FeatureTensor {
    std::size_t height = 0, width = 0, channels = 0;
    std::vector<double> data;

    FeatureTensor() = default;
    FeatureTensor(std::size_t h, std::size_t w, std::size_t c, double fill = 0.0)
        : height(h), width(w), channels(c), data(h * w * c, fill) {}

    double& at(std::size_t i, std::size_t j, std::size_t c) {
        return data[(i * width + j) * channels + c];
    }
    double at(std::size_t i, std::size_t j, std::size_t c) const {
        return data[(i * width + j) * channels + c];
    }
    std::span<const double> pixel(std::size_t i, std::size_t j) const {
        return {data.data() + (i * width + j) * channels, channels};
    }
    std::span<double> pixel(std::size_t i, std::size_t j) {
        return {data.data() + (i * width + j) * channels, channels};
    }
    std::size_t size() const { return data.size(); }
    bool same_shape(const FeatureTensor& o) const {
        return height == o.height && width == o.width && channels == o.channels;
    }
};

/// A quantum pointwise layer's kernels: n_circuits independent parameter
/// sets, shared across every spatial position.
struct KernelBank {
    std::vector<CircuitParams> kernels;
    // Channels kept after concatenation; trailing outputs of the last
    // kernel are dropped when this is below kernels * qubits.
    std::size_t c_out = 0;

    std::size_t n_qubits() const { return kernels.at(0).n_qubits; }
    std::size_t full_channels() const { return kernels.size() * n_qubits(); }

    void validate() const {
        if (kernels.empty()) throw std::invalid_argument("kernel bank is empty");
        for (const auto& k : kernels) {
            k.validate();
            if (k.n_qubits != n_qubits() || k.n_blocks() != kernels[0].n_blocks())
                throw std::invalid_argument("kernels must share n_qubits and depth");
        }
        if (c_out == 0 || c_out > full_channels())
            throw std::invalid_argument("c_out must be in [1, n_circuits * n_qubits]");
    }

    std::size_t param_count() const {
        std::size_t n = 0;
        for (const auto& k : kernels) n += k.param_count();
        return n;
    }
};

inline KernelBank make_kernel_bank(std::size_t n_circuits, std::size_t n_qubits,
                                   std::size_t n_blocks, Entangler entangler,
                                   std::uint64_t seed, std::size_t c_out = 0) {
    KernelBank bank;
    for (std::size_t k = 0; k < n_circuits; ++k)
        bank.kernels.push_back(
            make_random_circuit(n_qubits, n_blocks, entangler, mix_seed(seed, k)));
    bank.c_out = c_out == 0 ? n_circuits * n_qubits : c_out;
    bank.validate();
    return bank;
}

/// Per-pixel channel vectors through every kernel; outputs concatenated
/// along the channel dimension. Spatial shape is preserved.
inline FeatureTensor qpconv_forward(const KernelBank& bank, const FeatureTensor& input,
                                    unsigned workers = 1) {
    bank.validate();
    if (required_qubits(input.channels) > bank.n_qubits())
        throw ConfigError("qpconv: input channels exceed kernel qubit capacity");
    const std::size_t nq = bank.n_qubits();
    FeatureTensor out(input.height, input.width, bank.c_out);
    const std::size_t pixels = input.height * input.width;
    parallel_for(pixels * bank.kernels.size(), workers, [&](std::size_t task) {
        const std::size_t p = task / bank.kernels.size();
        const std::size_t k = task % bank.kernels.size();
        const std::size_t i = p / input.width, j = p % input.width;
        const std::vector<double> e =
            forward_expectations(bank.kernels[k], input.pixel(i, j));
        for (std::size_t q = 0; q < nq; ++q) {
            const std::size_t ch = k * nq + q;
            if (ch < bank.c_out) out.at(i, j, ch) = e[q];
        }
    });
    return out;
}

struct QpconvGradients {
    std::vector<std::vector<double>> param_grads;  // one flat vector per kernel
    FeatureTensor input_grads;
};

/// Weight sharing sums each kernel's parameter gradient over all pixels.
/// Per-pixel gradients are computed in parallel and reduced in pixel
/// order, so the result is independent of the worker count.
inline QpconvGradients qpconv_backward(const KernelBank& bank, const FeatureTensor& input,
                                       const FeatureTensor& upstream, unsigned workers = 1,
                                       GradEngine engine = GradEngine::Adjoint) {
    bank.validate();
    if (upstream.height != input.height || upstream.width != input.width ||
        upstream.channels != bank.c_out)
        throw std::invalid_argument("qpconv_backward: upstream shape mismatch");
    const std::size_t nq = bank.n_qubits();
    const std::size_t nk = bank.kernels.size();
    const std::size_t pixels = input.height * input.width;

    std::vector<CircuitGradients> per_task(pixels * nk);
    parallel_for(pixels * nk, workers, [&](std::size_t task) {
        const std::size_t p = task / nk;
        const std::size_t k = task % nk;
        const std::size_t i = p / input.width, j = p % input.width;
        std::vector<double> up(nq, 0.0);
        for (std::size_t q = 0; q < nq; ++q) {
            const std::size_t ch = k * nq + q;
            if (ch < bank.c_out) up[q] = upstream.at(i, j, ch);
        }
        per_task[task] = backward(bank.kernels[k], input.pixel(i, j), up, engine);
    });

    QpconvGradients out;
    out.param_grads.assign(nk, {});
    for (std::size_t k = 0; k < nk; ++k)
        out.param_grads[k].assign(bank.kernels[k].param_count(), 0.0);
    out.input_grads = FeatureTensor(input.height, input.width, input.channels);
    for (std::size_t task = 0; task < per_task.size(); ++task) {
        const std::size_t p = task / nk;
        const std::size_t k = task % nk;
        const std::size_t i = p / input.width, j = p % input.width;
        const CircuitGradients& g = per_task[task];
        for (std::size_t x = 0; x < g.param_grads.size(); ++x)
            out.param_grads[k][x] += g.param_grads[x];
        for (std::size_t c = 0; c < input.channels; ++c)
            out.input_grads.at(i, j, c) += g.input_grads[c];
    }
    return out;
}

/// Classical 1x1 convolution: per-pixel Y = W^T x + b with W of shape
/// C_in x C_out.
inline FeatureTensor classical_pointwise_forward(const std::vector<double>& weights,
                                                 const std::vector<double>& bias,
                                                 std::size_t c_in, std::size_t c_out,
                                                 const FeatureTensor& input) {
    if (input.channels != c_in || weights.size() != c_in * c_out ||
        bias.size() != c_out)
        throw std::invalid_argument("classical_pointwise: shape mismatch");
    FeatureTensor out(input.height, input.width, c_out);
    for (std::size_t i = 0; i < input.height; ++i)
        for (std::size_t j = 0; j < input.width; ++j)
            for (std::size_t k = 0; k < c_out; ++k) {
                double acc = bias[k];
                for (std::size_t c = 0; c < c_in; ++c)
                    acc += input.at(i, j, c) * weights[c * c_out + k];
                out.at(i, j, k) = acc;
            }
    return out;
}

struct PointwiseGradients {
    std::vector<double> weight_grads;
    std::vector<double> bias_grads;
    FeatureTensor input_grads;
};

inline PointwiseGradients classical_pointwise_backward(
    const std::vector<double>& weights, std::size_t c_in, std::size_t c_out,
    const FeatureTensor& input, const FeatureTensor& upstream) {
    if (upstream.height != input.height || upstream.width != input.width ||
        upstream.channels != c_out || input.channels != c_in)
        throw std::invalid_argument("classical_pointwise_backward: shape mismatch");
    PointwiseGradients g;
    g.weight_grads.assign(c_in * c_out, 0.0);
    g.bias_grads.assign(c_out, 0.0);
    g.input_grads = FeatureTensor(input.height, input.width, c_in);
    for (std::size_t i = 0; i < input.height; ++i)
        for (std::size_t j = 0; j < input.width; ++j)
            for (std::size_t k = 0; k < c_out; ++k) {
                const double u = upstream.at(i, j, k);
                g.bias_grads[k] += u;
                for (std::size_t c = 0; c < c_in; ++c) {
                    g.weight_grads[c * c_out + k] += input.at(i, j, c) * u;
                    g.input_grads.at(i, j, c) += weights[c * c_out + k] * u;
                }
            }
    return g;
}

}  // namespace qpc
