#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "limbnet/layers.hpp"
#include "limbnet/rng.hpp"
#include "limbnet/tensor.hpp"

namespace limbnet {

// ======================================================================
// Configuration
// ======================================================================

struct ConvSpec {
    std::size_t kernel_size;
    std::size_t out_channels;
    bool operator==(const ConvSpec&) const = default;
};

struct ModelConfig {
    std::size_t window_len = 256;
    std::size_t n_channels = 4;
    std::vector<ConvSpec> convs = {{5, 16}, {3, 8}, {3, 4}};
    std::size_t pool_window = 2;
    Padding padding = Padding::same;
    std::size_t attention_dim = 128;   // u
    std::size_t n_attention_heads = 2;
    std::size_t dense_hidden = 100;
    std::size_t n_classes = 3;
    double dropout_rate = 0.5;
    std::uint64_t seed = 1;

    bool operator==(const ModelConfig&) const = default;

    // Throws std::invalid_argument on violated invariants.
    void validate() const;

    // Per-branch signal length after each conv+pool stage, and the
    // flattened branch dimension (last out_channels * last length).
    std::vector<std::size_t> branch_lengths() const;
    std::size_t branch_flat_dim() const;
    std::size_t concat_dim() const;  // n_attention_heads * branch_flat_dim
};

// ======================================================================
// Parameters, stored in the canonical order:
//   branch 0..n_channels-1: conv1 kernels, conv1 bias, conv2 ..., conv3 ...
//   head 0..n_heads-1:      W, b, v
//   dense hidden:           weights, bias
//   output layer:           weights, bias
// ======================================================================

struct ConvLayerParams {
    TensorF kernels;            // C_out x C_in x K
    std::vector<double> bias;   // C_out
};

struct AttentionParams {
    TensorF W;                  // u x d
    std::vector<double> b;      // u
    std::vector<double> v;      // u
};

struct DenseParams {
    TensorF weights;            // m x n
    std::vector<double> bias;   // m
};

struct ModelWeights {
    ModelConfig config;
    std::vector<std::vector<ConvLayerParams>> branches;  // [channel][conv layer]
    std::vector<AttentionParams> heads;
    DenseParams hidden;
    DenseParams output;

    std::size_t scalar_count() const;
    bool all_finite() const;

    // Visits every parameter block in canonical order.
    template <class Fn>
    void for_each_block(Fn&& fn) {
        for (auto& br : branches)
            for (auto& cl : br) {
                fn(cl.kernels.data.data(), cl.kernels.data.size());
                fn(cl.bias.data(), cl.bias.size());
            }
        for (auto& h : heads) {
            fn(h.W.data.data(), h.W.data.size());
            fn(h.b.data(), h.b.size());
            fn(h.v.data(), h.v.size());
        }
        fn(hidden.weights.data.data(), hidden.weights.data.size());
        fn(hidden.bias.data(), hidden.bias.size());
        fn(output.weights.data.data(), output.weights.data.size());
        fn(output.bias.data(), output.bias.size());
    }
    template <class Fn>
    void for_each_block(Fn&& fn) const {
        const_cast<ModelWeights*>(this)->for_each_block(
            [&](double* p, std::size_t n) { fn(static_cast<const double*>(p), n); });
    }

    std::vector<double> flatten() const;
    void unflatten(const std::vector<double>& flat);
};

// Gradients share the parameter layout.
using ModelGrads = ModelWeights;

ModelWeights zeros_like(const ModelWeights& w);
void accumulate(ModelGrads& into, const ModelGrads& g);
void scale(ModelGrads& g, double s);

// ======================================================================
// Parameter accounting
// ======================================================================

struct ParamBreakdown {
    std::vector<std::pair<std::string, std::size_t>> blocks;
    std::size_t total = 0;

    std::string to_string() const;
};

ParamBreakdown parameter_count(const ModelConfig& config);

// ======================================================================
// Build / forward / backward
// ======================================================================

// Glorot-uniform weights, zero biases, seeded from config.seed.
ModelWeights build_model(const ModelConfig& config, Rng& rng);
ModelWeights build_model(const ModelConfig& config);  // rng from config.seed

struct ClassProbs {
    std::vector<double> probabilities;
    std::size_t predicted_class = 0;  // argmax, tie -> lowest index
};

enum class RunMode { train, eval };

// Everything backward() needs, captured by a train-mode forward.
struct ForwardCache {
    bool valid = false;
    TensorF window;                                   // the input
    struct BranchCache {
        std::vector<TensorF> conv_in;                 // input of each conv
        std::vector<TensorF> relu_out;                // post-activation maps
        std::vector<std::vector<std::size_t>> pool_argmax;
        std::vector<std::size_t> pool_in_len;
        std::vector<double> flat;                     // branch vector h_b
    };
    std::vector<BranchCache> branch;
    std::vector<std::vector<double>> states;          // the h_b again, as attention input
    std::vector<double> concat;                       // joined head contexts
    std::vector<double> dropout1_mask;
    std::vector<double> dropped;                      // concat after dropout
    std::vector<double> hidden_pre;                   // dense hidden pre-activation
    std::vector<double> hidden_act;
    std::vector<double> logits_pre;                   // output dense result
    std::vector<double> dropout2_mask;
    std::vector<double> logits;                       // after the logit dropout
};

struct ForwardResult {
    ClassProbs probs;
    ForwardCache cache;   // valid only for train-mode calls
};

// rng is consumed only in train mode (dropout masks); eval is a pure
// deterministic function of (weights, window).
ForwardResult forward(const ModelWeights& weights, const TensorF& window,
                      RunMode mode, Rng* rng);

// d_logits is dLoss w.r.t. the final (post-dropout) logits.
ModelGrads backward(const ModelWeights& weights, const ForwardCache& cache,
                    const std::vector<double>& d_logits);

}  // namespace limbnet
