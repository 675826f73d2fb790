#pragma once

#include <cstddef>
#include <vector>

#include "limbnet/rng.hpp"
#include "limbnet/tensor.hpp"

namespace limbnet {

enum class Padding { valid, same };

// ======================================================================
// 1-D convolution
//
// input   C_in x L          (one row per channel)
// kernels C_out x C_in x K
// bias    C_out
// out     C_out x L'        L' = L-K+1 (valid) or L (same, zero padded)
// ======================================================================

TensorF conv1d_forward(const TensorF& input, const TensorF& kernels,
                       const std::vector<double>& bias, Padding padding);

struct Conv1dGrads {
    TensorF d_kernels;            // C_out x C_in x K
    std::vector<double> d_bias;   // C_out
    TensorF d_input;              // C_in x L
};

Conv1dGrads conv1d_backward(const TensorF& input, const TensorF& kernels,
                            const TensorF& upstream_grad, Padding padding);

// ======================================================================
// Max pooling, window 2 / stride 2. A trailing odd sample is dropped;
// ties go to the lower index. argmax stores the winning input position
// (absolute, per channel) for the backward routing.
// ======================================================================

struct MaxPool1dResult {
    TensorF output;                   // C x floor(L/2)
    std::vector<std::size_t> argmax;  // numel(output) entries, input positions
};

MaxPool1dResult maxpool1d_forward(const TensorF& input);

TensorF maxpool1d_backward(const std::vector<std::size_t>& argmax,
                           const TensorF& upstream_grad, std::size_t input_len);

// ======================================================================
// Dense (fully connected): out = weights * input + bias
// ======================================================================

std::vector<double> dense_forward(const std::vector<double>& input,
                                  const TensorF& weights,
                                  const std::vector<double>& bias);

struct DenseGrads {
    TensorF d_weights;             // m x n
    std::vector<double> d_bias;    // m
    std::vector<double> d_input;   // n
};

DenseGrads dense_backward(const std::vector<double>& input, const TensorF& weights,
                          const std::vector<double>& upstream_grad);

// ======================================================================
// Activations
// ======================================================================

TensorF relu(const TensorF& x);
TensorF tanh_act(const TensorF& x);

// Numerically stable (max-subtracted); output sums to 1.
std::vector<double> softmax(const std::vector<double>& x);

// ======================================================================
// Additive (Bahdanau) attention over M state vectors of dim d:
//   score_i = v . tanh(W h_i + b),  alpha = softmax(score),
//   context = sum_i alpha_i h_i
// W is u x d, b and v are u-vectors.
// ======================================================================

struct AttentionOut {
    std::vector<double> context;  // d
    std::vector<double> weights;  // M, the alphas
};

AttentionOut additive_attention(const std::vector<std::vector<double>>& states,
                                const TensorF& W, const std::vector<double>& b,
                                const std::vector<double>& v);

struct AttentionGrads {
    TensorF d_W;
    std::vector<double> d_b;
    std::vector<double> d_v;
    std::vector<std::vector<double>> d_states;
};

// upstream_grad is dLoss/dcontext (d-vector).
AttentionGrads additive_attention_backward(
    const std::vector<std::vector<double>>& states, const TensorF& W,
    const std::vector<double>& b, const std::vector<double>& v,
    const std::vector<double>& upstream_grad);

// ======================================================================
// Inverted dropout: training zeroes entries with probability `rate` and
// scales survivors by 1/(1-rate); eval mode is the identity and consumes
// no rng draws. rate must be in [0,1).
// ======================================================================

struct DropoutResult {
    TensorF output;
    std::vector<double> mask;  // per entry: 0 or 1/(1-rate); empty when identity
};

DropoutResult dropout_with_mask(const TensorF& x, double rate, bool training, Rng* rng);

TensorF dropout(const TensorF& x, double rate, bool training, Rng& rng);

// ======================================================================
// Softmax cross-entropy on logits.
//   loss = -log softmax(logits)[true_class]
//   grad = softmax(logits) - onehot(true_class)
// ======================================================================

struct CrossEntropyOut {
    double loss;
    std::vector<double> d_logits;
    std::vector<double> probs;
};

CrossEntropyOut softmax_cross_entropy(const std::vector<double>& logits, int true_class);

}  // namespace limbnet
