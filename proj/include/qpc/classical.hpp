// Copyright 2026 the qpcnn authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "qpc/qpconv.hpp"

namespace qpc {

// ---------------------------------------------------------------- conv 3x3

// Weights laid out [ky][kx][c_in][c_out], padding 1, stride 1
// (cross-correlation), so spatial shape is preserved.
inline FeatureTensor conv3x3_forward(const std::vector<double>& weights,
                                     const std::vector<double>& bias, std::size_t c_in,
                                     std::size_t c_out, const FeatureTensor& input) {
    if (input.channels != c_in || weights.size() != 9 * c_in * c_out ||
        bias.size() != c_out)
        throw std::invalid_argument("conv3x3: shape mismatch");
    FeatureTensor out(input.height, input.width, c_out);
    const auto H = static_cast<std::ptrdiff_t>(input.height);
    const auto W = static_cast<std::ptrdiff_t>(input.width);
    for (std::ptrdiff_t i = 0; i < H; ++i)
        for (std::ptrdiff_t j = 0; j < W; ++j)
            for (std::size_t k = 0; k < c_out; ++k) {
                double acc = bias[k];
                for (std::ptrdiff_t dy = -1; dy <= 1; ++dy)
                    for (std::ptrdiff_t dx = -1; dx <= 1; ++dx) {
                        const std::ptrdiff_t y = i + dy, x = j + dx;
                        if (y < 0 || y >= H || x < 0 || x >= W) continue;
                        const std::size_t wbase =
                            ((static_cast<std::size_t>(dy + 1) * 3 +
                              static_cast<std::size_t>(dx + 1)) *
                             c_in) *
                            c_out;
                        for (std::size_t c = 0; c < c_in; ++c)
                            acc += input.at(static_cast<std::size_t>(y),
                                            static_cast<std::size_t>(x), c) *
                                   weights[wbase + c * c_out + k];
                    }
                out.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j), k) = acc;
            }
    return out;
}

struct Conv3x3Gradients {
    std::vector<double> weight_grads;
    std::vector<double> bias_grads;
    FeatureTensor input_grads;
};

inline Conv3x3Gradients conv3x3_backward(const std::vector<double>& weights,
                                         std::size_t c_in, std::size_t c_out,
                                         const FeatureTensor& input,
                                         const FeatureTensor& upstream) {
    if (!upstream.same_shape(FeatureTensor(input.height, input.width, c_out)))
        throw std::invalid_argument("conv3x3_backward: upstream shape mismatch");
    Conv3x3Gradients g;
    g.weight_grads.assign(9 * c_in * c_out, 0.0);
    g.bias_grads.assign(c_out, 0.0);
    g.input_grads = FeatureTensor(input.height, input.width, c_in);
    const auto H = static_cast<std::ptrdiff_t>(input.height);
    const auto W = static_cast<std::ptrdiff_t>(input.width);
    for (std::ptrdiff_t i = 0; i < H; ++i)
        for (std::ptrdiff_t j = 0; j < W; ++j)
            for (std::size_t k = 0; k < c_out; ++k) {
                const double u = upstream.at(static_cast<std::size_t>(i),
                                             static_cast<std::size_t>(j), k);
                g.bias_grads[k] += u;
                for (std::ptrdiff_t dy = -1; dy <= 1; ++dy)
                    for (std::ptrdiff_t dx = -1; dx <= 1; ++dx) {
                        const std::ptrdiff_t y = i + dy, x = j + dx;
                        if (y < 0 || y >= H || x < 0 || x >= W) continue;
                        const std::size_t wbase =
                            ((static_cast<std::size_t>(dy + 1) * 3 +
                              static_cast<std::size_t>(dx + 1)) *
                             c_in) *
                            c_out;
                        for (std::size_t c = 0; c < c_in; ++c) {
                            const auto yy = static_cast<std::size_t>(y);
                            const auto xx = static_cast<std::size_t>(x);
                            g.weight_grads[wbase + c * c_out + k] +=
                                input.at(yy, xx, c) * u;
                            g.input_grads.at(yy, xx, c) +=
                                weights[wbase + c * c_out + k] * u;
                        }
                    }
            }
    return g;
}

// ------------------------------------------------------------------- relu

inline FeatureTensor relu(const FeatureTensor& input) {
    FeatureTensor out = input;
    for (double& v : out.data) v = std::max(0.0, v);
    return out;
}

inline FeatureTensor relu_backward(const FeatureTensor& input,
                                   const FeatureTensor& upstream) {
    FeatureTensor g = upstream;
    for (std::size_t i = 0; i < g.data.size(); ++i)
        if (input.data[i] <= 0.0) g.data[i] = 0.0;
    return g;
}

// ---------------------------------------------------- softmax cross-entropy

struct LossResult {
    double loss;
    std::vector<double> grad;  // d loss / d logits = softmax - onehot
    std::vector<double> probs;
};

inline LossResult softmax_cross_entropy(std::span<const double> logits,
                                        std::size_t label) {
    if (logits.size() < 2)
        throw std::invalid_argument("softmax_cross_entropy: need at least 2 classes");
    if (label >= logits.size())
        throw std::out_of_range("softmax_cross_entropy: label out of range");
    const double mx = *std::max_element(logits.begin(), logits.end());
    LossResult r;
    r.probs.resize(logits.size());
    double z = 0.0;
    for (std::size_t k = 0; k < logits.size(); ++k) {
        r.probs[k] = std::exp(logits[k] - mx);
        z += r.probs[k];
    }
    for (double& p : r.probs) p /= z;
    r.loss = -std::log(r.probs[label]);
    r.grad = r.probs;
    r.grad[label] -= 1.0;
    return r;
}

// ------------------------------------------------------------------- adam

struct AdamState {
    std::size_t t = 0;
    double beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8;
    std::vector<double> m, v;

    void init(std::size_t n) {
        m.assign(n, 0.0);
        v.assign(n, 0.0);
        t = 0;
    }
};

inline void adam_step(AdamState& state, std::span<double> params,
                      std::span<const double> grads, double lr) {
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw std::invalid_argument("adam_step: shape mismatch");
    state.t += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grads[i];
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grads[i] * grads[i];
        const double mh = state.m[i] / bc1;
        const double vh = state.v[i] / bc2;
        params[i] -= lr * mh / (std::sqrt(vh) + state.epsilon);
    }
}

// ----------------------------------------------------------------- schedule

/// lr = 1/2 lr0 (1 + cos(pi * epoch / total)), annealing to zero.
inline double cosine_lr(std::size_t epoch, std::size_t total_epochs, double lr0) {
    if (total_epochs == 0) return lr0;
    return 0.5 * lr0 *
           (1.0 + std::cos(std::numbers::pi * static_cast<double>(epoch) /
                           static_cast<double>(total_epochs)));
}

// ---------------------------------------------------------------- dropout

struct DropoutResult {
    FeatureTensor output;
    std::vector<std::uint8_t> keep_mask;  // empty in eval mode
};

inline DropoutResult dropout(const FeatureTensor& input, double rate, bool training,
                             std::mt19937_64& rng) {
    if (rate < 0.0 || rate >= 1.0)
        throw std::invalid_argument("dropout: rate must be in [0, 1)");
    DropoutResult r;
    r.output = input;
    if (!training || rate == 0.0) return r;
    const double scale = 1.0 / (1.0 - rate);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    r.keep_mask.resize(input.data.size());
    for (std::size_t i = 0; i < input.data.size(); ++i) {
        const bool keep = u(rng) >= rate;
        r.keep_mask[i] = keep ? 1 : 0;
        r.output.data[i] = keep ? input.data[i] * scale : 0.0;
    }
    return r;
}

inline FeatureTensor dropout_backward(const std::vector<std::uint8_t>& keep_mask,
                                      double rate, const FeatureTensor& upstream) {
    FeatureTensor g = upstream;
    if (keep_mask.empty()) return g;
    const double scale = 1.0 / (1.0 - rate);
    for (std::size_t i = 0; i < g.data.size(); ++i)
        g.data[i] = keep_mask[i] ? g.data[i] * scale : 0.0;
    return g;
}

// ------------------------------------------------------------- batch norm

struct BatchNormState {
    std::vector<double> gamma, beta;
    std::vector<double> running_mean, running_var;
    double epsilon = 1e-5;
    double momentum = 0.1;

    void init(std::size_t channels) {
        gamma.assign(channels, 1.0);
        beta.assign(channels, 0.0);
        running_mean.assign(channels, 0.0);
        running_var.assign(channels, 1.0);
    }
};

struct BatchNormCache {
    std::vector<double> mean, var;      // per-channel batch statistics
    std::vector<FeatureTensor> x_hat;   // normalized inputs
};

/// Per-channel normalization over the whole batch (N x H x W samples per
/// channel). Training mode updates running statistics with momentum.
inline std::vector<FeatureTensor> batchnorm_forward(BatchNormState& state,
                                                    const std::vector<FeatureTensor>& batch,
                                                    bool training,
                                                    BatchNormCache* cache = nullptr) {
    if (batch.empty()) throw std::invalid_argument("batchnorm: empty batch");
    const std::size_t C = batch[0].channels;
    if (state.gamma.size() != C)
        throw std::invalid_argument("batchnorm: channel count mismatch");
    if (training && batch.size() < 2)
        throw std::invalid_argument("batchnorm: training needs batch size >= 2");

    std::vector<double> mean(C, 0.0), var(C, 0.0);
    if (training) {
        const double count =
            static_cast<double>(batch.size() * batch[0].height * batch[0].width);
        for (const auto& t : batch)
            for (std::size_t p = 0; p < t.height * t.width; ++p)
                for (std::size_t c = 0; c < C; ++c) mean[c] += t.data[p * C + c];
        for (std::size_t c = 0; c < C; ++c) mean[c] /= count;
        for (const auto& t : batch)
            for (std::size_t p = 0; p < t.height * t.width; ++p)
                for (std::size_t c = 0; c < C; ++c) {
                    const double d = t.data[p * C + c] - mean[c];
                    var[c] += d * d;
                }
        for (std::size_t c = 0; c < C; ++c) var[c] /= count;
        for (std::size_t c = 0; c < C; ++c) {
            state.running_mean[c] =
                (1.0 - state.momentum) * state.running_mean[c] + state.momentum * mean[c];
            state.running_var[c] =
                (1.0 - state.momentum) * state.running_var[c] + state.momentum * var[c];
        }
    } else {
        mean = state.running_mean;
        var = state.running_var;
    }

    std::vector<FeatureTensor> out;
    out.reserve(batch.size());
    if (cache) {
        cache->mean = mean;
        cache->var = var;
        cache->x_hat.clear();
    }
    for (const auto& t : batch) {
        FeatureTensor o = t;
        FeatureTensor xh = t;
        for (std::size_t p = 0; p < t.height * t.width; ++p)
            for (std::size_t c = 0; c < C; ++c) {
                const double h =
                    (t.data[p * C + c] - mean[c]) / std::sqrt(var[c] + state.epsilon);
                xh.data[p * C + c] = h;
                o.data[p * C + c] = state.gamma[c] * h + state.beta[c];
            }
        if (cache) cache->x_hat.push_back(std::move(xh));
        out.push_back(std::move(o));
    }
    return out;
}

struct BatchNormGradients {
    std::vector<double> gamma_grads, beta_grads;
    std::vector<FeatureTensor> input_grads;
};

inline BatchNormGradients batchnorm_backward(const BatchNormState& state,
                                             const BatchNormCache& cache,
                                             const std::vector<FeatureTensor>& upstream) {
    const std::size_t C = state.gamma.size();
    const std::size_t M =
        upstream.size() * upstream[0].height * upstream[0].width;  // per channel
    BatchNormGradients g;
    g.gamma_grads.assign(C, 0.0);
    g.beta_grads.assign(C, 0.0);

    std::vector<double> sum_u(C, 0.0), sum_uxh(C, 0.0);
    for (std::size_t s = 0; s < upstream.size(); ++s)
        for (std::size_t p = 0; p < upstream[s].height * upstream[s].width; ++p)
            for (std::size_t c = 0; c < C; ++c) {
                const double u = upstream[s].data[p * C + c];
                sum_u[c] += u;
                sum_uxh[c] += u * cache.x_hat[s].data[p * C + c];
            }
    g.gamma_grads = sum_uxh;
    g.beta_grads = sum_u;

    g.input_grads.reserve(upstream.size());
    for (std::size_t s = 0; s < upstream.size(); ++s) {
        FeatureTensor di = upstream[s];
        for (std::size_t p = 0; p < upstream[s].height * upstream[s].width; ++p)
            for (std::size_t c = 0; c < C; ++c) {
                const double u = upstream[s].data[p * C + c];
                const double xh = cache.x_hat[s].data[p * C + c];
                const double inv_std = 1.0 / std::sqrt(cache.var[c] + state.epsilon);
                di.data[p * C + c] =
                    state.gamma[c] * inv_std / static_cast<double>(M) *
                    (static_cast<double>(M) * u - sum_u[c] - xh * sum_uxh[c]);
            }
        g.input_grads.push_back(std::move(di));
    }
    return g;
}

}  // namespace qpc
