// Copyright 2026 the qpcnn authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qpc/classical.hpp"
#include "qpc/data.hpp"
#include "qpc/qpconv.hpp"
#include "qpc/util.hpp"

namespace qpc {

using Batch = std::vector<FeatureTensor>;

struct Shape {
    std::size_t h = 0, w = 0, c = 0;
    bool operator==(const Shape&) const = default;
};

struct LayerContext {
    bool training = false;
    unsigned workers = 1;
    std::mt19937_64* rng = nullptr;
};

class Layer {
  public:
    virtual ~Layer() = default;
    virtual std::string kind() const = 0;
    virtual Shape output_shape(Shape in) const = 0;
    virtual Batch forward(const Batch& in, LayerContext& ctx) = 0;
    virtual Batch backward(const Batch& upstream) = 0;

    virtual std::size_t param_count() const { return 0; }
    virtual void get_params(std::span<double>) const {}
    virtual void set_params(std::span<const double>) {}
    virtual void get_grads(std::span<double>) const {}
    // Non-trainable state carried into checkpoints (BN running stats).
    virtual void append_aux_state(std::vector<double>&) const {}
};

namespace init {

// Uniform in +-sqrt(1/fan_in), seeded.
inline std::vector<double> fan_in_uniform(std::size_t n, std::size_t fan_in,
                                          std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-bound, bound);
    std::vector<double> out(n);
    for (double& v : out) v = u(rng);
    return out;
}

}  // namespace init

class Conv3x3Layer final : public Layer {
  public:
    Conv3x3Layer(std::size_t c_in, std::size_t c_out, std::uint64_t seed)
        : c_in_(c_in), c_out_(c_out),
          weights_(init::fan_in_uniform(9 * c_in * c_out, 9 * c_in, seed)),
          bias_(c_out, 0.0) {}

    std::string kind() const override { return "conv3x3"; }
    Shape output_shape(Shape in) const override {
        if (in.c != c_in_) throw ConfigError("conv3x3: channel mismatch");
        return {in.h, in.w, c_out_};
    }

    Batch forward(const Batch& in, LayerContext&) override {
        input_ = in;
        Batch out;
        out.reserve(in.size());
        for (const auto& t : in)
            out.push_back(conv3x3_forward(weights_, bias_, c_in_, c_out_, t));
        return out;
    }

    Batch backward(const Batch& upstream) override {
        wgrads_.assign(weights_.size(), 0.0);
        bgrads_.assign(bias_.size(), 0.0);
        Batch down;
        down.reserve(upstream.size());
        for (std::size_t s = 0; s < upstream.size(); ++s) {
            auto g = conv3x3_backward(weights_, c_in_, c_out_, input_[s], upstream[s]);
            for (std::size_t i = 0; i < wgrads_.size(); ++i)
                wgrads_[i] += g.weight_grads[i];
            for (std::size_t i = 0; i < bgrads_.size(); ++i)
                bgrads_[i] += g.bias_grads[i];
            down.push_back(std::move(g.input_grads));
        }
        return down;
    }

    std::size_t param_count() const override { return weights_.size() + bias_.size(); }
    void get_params(std::span<double> out) const override {
        std::copy(weights_.begin(), weights_.end(), out.begin());
        std::copy(bias_.begin(), bias_.end(), out.begin() + weights_.size());
    }
    void set_params(std::span<const double> in) override {
        std::copy(in.begin(), in.begin() + weights_.size(), weights_.begin());
        std::copy(in.begin() + weights_.size(), in.end(), bias_.begin());
    }
    void get_grads(std::span<double> out) const override {
        std::copy(wgrads_.begin(), wgrads_.end(), out.begin());
        std::copy(bgrads_.begin(), bgrads_.end(), out.begin() + wgrads_.size());
    }

  private:
    std::size_t c_in_, c_out_;
    std::vector<double> weights_, bias_, wgrads_, bgrads_;
    Batch input_;
};

class ReluLayer final : public Layer {
  public:
    std::string kind() const override { return "relu"; }
    Shape output_shape(Shape in) const override { return in; }

    Batch forward(const Batch& in, LayerContext&) override {
        input_ = in;
        Batch out;
        out.reserve(in.size());
        for (const auto& t : in) out.push_back(relu(t));
        return out;
    }

    Batch backward(const Batch& upstream) override {
        Batch down;
        down.reserve(upstream.size());
        for (std::size_t s = 0; s < upstream.size(); ++s)
            down.push_back(relu_backward(input_[s], upstream[s]));
        return down;
    }

  private:
    Batch input_;
};

class FlattenLayer final : public Layer {
  public:
    std::string kind() const override { return "flatten"; }
    Shape output_shape(Shape in) const override { return {1, 1, in.h * in.w * in.c}; }

    Batch forward(const Batch& in, LayerContext&) override {
        in_shape_ = {in[0].height, in[0].width, in[0].channels};
        Batch out;
        out.reserve(in.size());
        for (const auto& t : in) {
            FeatureTensor f(1, 1, t.size());
            f.data = t.data;
            out.push_back(std::move(f));
        }
        return out;
    }

    Batch backward(const Batch& upstream) override {
        Batch down;
        down.reserve(upstream.size());
        for (const auto& u : upstream) {
            FeatureTensor t(in_shape_.h, in_shape_.w, in_shape_.c);
            t.data = u.data;
            down.push_back(std::move(t));
        }
        return down;
    }

  private:
    Shape in_shape_;
};

class DropoutLayer final : public Layer {
  public:
    explicit DropoutLayer(double rate) : rate_(rate) {
        if (rate < 0.0 || rate >= 1.0) throw ConfigError("dropout rate must be in [0,1)");
    }

    std::string kind() const override { return "dropout"; }
    Shape output_shape(Shape in) const override { return in; }

    Batch forward(const Batch& in, LayerContext& ctx) override {
        masks_.clear();
        Batch out;
        out.reserve(in.size());
        std::mt19937_64 unused;  // inference path never draws from it
        for (const auto& t : in) {
            auto r = dropout(t, rate_, ctx.training && ctx.rng != nullptr,
                             ctx.rng ? *ctx.rng : unused);
            masks_.push_back(std::move(r.keep_mask));
            out.push_back(std::move(r.output));
        }
        return out;
    }

    Batch backward(const Batch& upstream) override {
        Batch down;
        down.reserve(upstream.size());
        for (std::size_t s = 0; s < upstream.size(); ++s)
            down.push_back(dropout_backward(masks_[s], rate_, upstream[s]));
        return down;
    }

  private:
    double rate_;
    std::vector<std::vector<std::uint8_t>> masks_;
};

class BatchNormLayer final : public Layer {
  public:
    explicit BatchNormLayer(std::size_t channels) : channels_(channels) {
        state_.init(channels);
    }

    std::string kind() const override { return "bn"; }
    Shape output_shape(Shape in) const override {
        if (in.c != channels_) throw ConfigError("bn: channel mismatch");
        return in;
    }

    Batch forward(const Batch& in, LayerContext& ctx) override {
        return batchnorm_forward(state_, in, ctx.training, &cache_);
    }

    Batch backward(const Batch& upstream) override {
        auto g = batchnorm_backward(state_, cache_, upstream);
        ggrads_ = std::move(g.gamma_grads);
        bgrads_ = std::move(g.beta_grads);
        return std::move(g.input_grads);
    }

    std::size_t param_count() const override { return 2 * channels_; }
    void get_params(std::span<double> out) const override {
        std::copy(state_.gamma.begin(), state_.gamma.end(), out.begin());
        std::copy(state_.beta.begin(), state_.beta.end(), out.begin() + channels_);
    }
    void set_params(std::span<const double> in) override {
        std::copy(in.begin(), in.begin() + channels_, state_.gamma.begin());
        std::copy(in.begin() + channels_, in.end(), state_.beta.begin());
    }
    void get_grads(std::span<double> out) const override {
        std::copy(ggrads_.begin(), ggrads_.end(), out.begin());
        std::copy(bgrads_.begin(), bgrads_.end(), out.begin() + channels_);
    }
    void append_aux_state(std::vector<double>& out) const override {
        out.insert(out.end(), state_.running_mean.begin(), state_.running_mean.end());
        out.insert(out.end(), state_.running_var.begin(), state_.running_var.end());
    }

  private:
    std::size_t channels_;
    BatchNormState state_;
    BatchNormCache cache_;
    std::vector<double> ggrads_, bgrads_;
};

/// Dense and classical 1x1 convolution share the per-pixel affine map;
/// dense additionally requires a 1x1 spatial input.
class PointwiseLayer final : public Layer {
  public:
    PointwiseLayer(std::string kind, std::size_t c_in, std::size_t c_out,
                   std::uint64_t seed)
        : kind_(std::move(kind)), c_in_(c_in), c_out_(c_out),
          weights_(init::fan_in_uniform(c_in * c_out, c_in, seed)), bias_(c_out, 0.0) {}

    std::string kind() const override { return kind_; }
    Shape output_shape(Shape in) const override {
        if (in.c != c_in_) throw ConfigError(kind_ + ": channel mismatch");
        if (kind_ == "dense" && (in.h != 1 || in.w != 1))
            throw ConfigError("dense: input must be flattened first");
        return {in.h, in.w, c_out_};
    }

    Batch forward(const Batch& in, LayerContext&) override {
        input_ = in;
        Batch out;
        out.reserve(in.size());
        for (const auto& t : in)
            out.push_back(classical_pointwise_forward(weights_, bias_, c_in_, c_out_, t));
        return out;
    }

    Batch backward(const Batch& upstream) override {
        wgrads_.assign(weights_.size(), 0.0);
        bgrads_.assign(bias_.size(), 0.0);
        Batch down;
        down.reserve(upstream.size());
        for (std::size_t s = 0; s < upstream.size(); ++s) {
            auto g = classical_pointwise_backward(weights_, c_in_, c_out_, input_[s],
                                                  upstream[s]);
            for (std::size_t i = 0; i < wgrads_.size(); ++i)
                wgrads_[i] += g.weight_grads[i];
            for (std::size_t i = 0; i < bgrads_.size(); ++i)
                bgrads_[i] += g.bias_grads[i];
            down.push_back(std::move(g.input_grads));
        }
        return down;
    }

    std::size_t param_count() const override { return weights_.size() + bias_.size(); }
    void get_params(std::span<double> out) const override {
        std::copy(weights_.begin(), weights_.end(), out.begin());
        std::copy(bias_.begin(), bias_.end(), out.begin() + weights_.size());
    }
    void set_params(std::span<const double> in) override {
        std::copy(in.begin(), in.begin() + weights_.size(), weights_.begin());
        std::copy(in.begin() + weights_.size(), in.end(), bias_.begin());
    }
    void get_grads(std::span<double> out) const override {
        std::copy(wgrads_.begin(), wgrads_.end(), out.begin());
        std::copy(bgrads_.begin(), bgrads_.end(), out.begin() + wgrads_.size());
    }

  private:
    std::string kind_;
    std::size_t c_in_, c_out_;
    std::vector<double> weights_, bias_, wgrads_, bgrads_;
    Batch input_;
};

class QpconvLayer final : public Layer {
  public:
    QpconvLayer(KernelBank bank, GradEngine engine = GradEngine::Adjoint)
        : bank_(std::move(bank)), engine_(engine) {
        bank_.validate();
    }

    const KernelBank& bank() const { return bank_; }

    std::string kind() const override { return "qpconv"; }
    Shape output_shape(Shape in) const override {
        if (required_qubits(in.c) > bank_.n_qubits())
            throw ConfigError("qpconv: input channels exceed qubit capacity");
        return {in.h, in.w, bank_.c_out};
    }

    Batch forward(const Batch& in, LayerContext& ctx) override {
        input_ = in;
        Batch out(in.size());
        parallel_for(in.size(), ctx.workers, [&](std::size_t s) {
            out[s] = qpconv_forward(bank_, in[s], 1);
        });
        workers_ = ctx.workers;
        return out;
    }

    Batch backward(const Batch& upstream) override {
        std::vector<QpconvGradients> per_sample(upstream.size());
        parallel_for(upstream.size(), workers_, [&](std::size_t s) {
            per_sample[s] = qpconv_backward(bank_, input_[s], upstream[s], 1, engine_);
        });
        grads_.assign(param_count(), 0.0);
        Batch down;
        down.reserve(upstream.size());
        for (std::size_t s = 0; s < upstream.size(); ++s) {
            std::size_t off = 0;
            for (std::size_t k = 0; k < bank_.kernels.size(); ++k) {
                for (double g : per_sample[s].param_grads[k]) grads_[off++] += g;
            }
            down.push_back(std::move(per_sample[s].input_grads));
        }
        return down;
    }

    std::size_t param_count() const override { return bank_.param_count(); }
    void get_params(std::span<double> out) const override {
        std::size_t off = 0;
        for (const auto& k : bank_.kernels)
            for (std::size_t p = 0; p < k.param_count(); ++p) out[off++] = k.param(p);
    }
    void set_params(std::span<const double> in) override {
        std::size_t off = 0;
        for (auto& k : bank_.kernels)
            for (std::size_t p = 0; p < k.param_count(); ++p) k.param(p) = in[off++];
    }
    void get_grads(std::span<double> out) const override {
        std::copy(grads_.begin(), grads_.end(), out.begin());
    }

  private:
    KernelBank bank_;
    GradEngine engine_;
    Batch input_;
    std::vector<double> grads_;
    unsigned workers_ = 1;
};

/// An ordered layer chain ending in a K-way dense head.
class Network {
  public:
    std::vector<std::unique_ptr<Layer>> layers;

    // Validates channel propagation once; returns the logits width.
    Shape check_shapes(Shape input) const {
        Shape s = input;
        for (const auto& l : layers) s = l->output_shape(s);
        if (layers.empty() || layers.back()->kind() != "dense")
            throw ConfigError("architecture must end with a dense layer");
        return s;
    }

    Batch forward(const Batch& in, LayerContext& ctx) {
        Batch b = in;
        for (auto& l : layers) b = l->forward(b, ctx);
        return b;
    }

    Batch backward(const Batch& upstream) {
        Batch b = upstream;
        for (auto it = layers.rbegin(); it != layers.rend(); ++it) b = (*it)->backward(b);
        return b;
    }

    std::size_t param_count() const {
        std::size_t n = 0;
        for (const auto& l : layers) n += l->param_count();
        return n;
    }
};

}  // namespace qpc
