#include "limbnet/layers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace limbnet {

namespace {

// Left pad for `same` mode; kernel length must be odd there.
std::size_t same_pad_left(std::size_t k) { return (k - 1) / 2; }

void check_conv_shapes(const TensorF& input, const TensorF& kernels,
                       const std::vector<double>* bias, Padding padding) {
    require_shape(input.rank() == 2,
                  "conv1d: input must be C_in x L, got " + shape_str(input.shape));
    require_shape(kernels.rank() == 3,
                  "conv1d: kernels must be C_out x C_in x K, got " + shape_str(kernels.shape));
    const std::size_t c_in = input.dim(0), len = input.dim(1);
    const std::size_t k = kernels.dim(2);
    require_shape(kernels.dim(1) == c_in,
                  "conv1d: kernel in-channels " + std::to_string(kernels.dim(1)) +
                      " != input channels " + std::to_string(c_in));
    if (bias)
        require_shape(bias->size() == kernels.dim(0),
                      "conv1d: bias size " + std::to_string(bias->size()) +
                          " != out channels " + std::to_string(kernels.dim(0)));
    if (padding == Padding::valid)
        require_shape(k <= len, "conv1d: kernel length " + std::to_string(k) +
                                    " exceeds input length " + std::to_string(len));
    else
        require_shape(k % 2 == 1, "conv1d: same padding needs odd kernel length, got " +
                                      std::to_string(k));
}

}  // namespace

TensorF conv1d_forward(const TensorF& input, const TensorF& kernels,
                       const std::vector<double>& bias, Padding padding) {
    check_conv_shapes(input, kernels, &bias, padding);
    const std::size_t c_in = input.dim(0), len = input.dim(1);
    const std::size_t c_out = kernels.dim(0), k = kernels.dim(2);
    const std::size_t out_len = padding == Padding::valid ? len - k + 1 : len;
    const std::size_t pad = padding == Padding::valid ? 0 : same_pad_left(k);

    TensorF out = TensorF::zeros({c_out, out_len});
    for (std::size_t o = 0; o < c_out; ++o) {
        double* out_row = &out.at(o, 0);
        for (std::size_t t = 0; t < out_len; ++t) out_row[t] = bias[o];
        for (std::size_t i = 0; i < c_in; ++i) {
            const double* in_row = &input.at(i, 0);
            const double* ker = &kernels.at(o, i, 0);
            for (std::size_t kk = 0; kk < k; ++kk) {
                const double w = ker[kk];
                if (w == 0.0) continue;
                // out[t] += w * in[t + kk - pad], clipped to the valid range of t
                const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(kk) -
                                             static_cast<std::ptrdiff_t>(pad);
                const std::size_t t_lo = shift < 0 ? static_cast<std::size_t>(-shift) : 0;
                const std::size_t t_hi = std::min<std::ptrdiff_t>(
                    out_len, static_cast<std::ptrdiff_t>(len) - shift);
                for (std::size_t t = t_lo; t < t_hi; ++t)
                    out_row[t] += w * in_row[static_cast<std::size_t>(
                                      static_cast<std::ptrdiff_t>(t) + shift)];
            }
        }
    }
    return out;
}

Conv1dGrads conv1d_backward(const TensorF& input, const TensorF& kernels,
                            const TensorF& upstream_grad, Padding padding) {
    check_conv_shapes(input, kernels, nullptr, padding);
    const std::size_t c_in = input.dim(0), len = input.dim(1);
    const std::size_t c_out = kernels.dim(0), k = kernels.dim(2);
    const std::size_t out_len = padding == Padding::valid ? len - k + 1 : len;
    const std::size_t pad = padding == Padding::valid ? 0 : same_pad_left(k);
    require_shape(upstream_grad.rank() == 2 && upstream_grad.dim(0) == c_out &&
                      upstream_grad.dim(1) == out_len,
                  "conv1d_backward: upstream must be " +
                      shape_str({c_out, out_len}) + ", got " + shape_str(upstream_grad.shape));

    Conv1dGrads g;
    g.d_kernels = TensorF::zeros({c_out, c_in, k});
    g.d_bias.assign(c_out, 0.0);
    g.d_input = TensorF::zeros({c_in, len});

    for (std::size_t o = 0; o < c_out; ++o) {
        const double* up = &upstream_grad.at(o, 0);
        for (std::size_t t = 0; t < out_len; ++t) g.d_bias[o] += up[t];
        for (std::size_t i = 0; i < c_in; ++i) {
            const double* in_row = &input.at(i, 0);
            double* din_row = &g.d_input.at(i, 0);
            const double* ker = &kernels.at(o, i, 0);
            double* dker = &g.d_kernels.at(o, i, 0);
            for (std::size_t kk = 0; kk < k; ++kk) {
                const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(kk) -
                                             static_cast<std::ptrdiff_t>(pad);
                const std::size_t t_lo = shift < 0 ? static_cast<std::size_t>(-shift) : 0;
                const std::size_t t_hi = std::min<std::ptrdiff_t>(
                    out_len, static_cast<std::ptrdiff_t>(len) - shift);
                double acc = 0.0;
                const double w = ker[kk];
                for (std::size_t t = t_lo; t < t_hi; ++t) {
                    const std::size_t src = static_cast<std::size_t>(
                        static_cast<std::ptrdiff_t>(t) + shift);
                    acc += up[t] * in_row[src];
                    din_row[src] += w * up[t];
                }
                dker[kk] += acc;
            }
        }
    }
    return g;
}

MaxPool1dResult maxpool1d_forward(const TensorF& input) {
    require_shape(input.rank() == 2,
                  "maxpool1d: input must be C x L, got " + shape_str(input.shape));
    const std::size_t c = input.dim(0), len = input.dim(1);
    require_shape(len >= 2, "maxpool1d: input length " + std::to_string(len) + " < 2");
    const std::size_t out_len = len / 2;

    MaxPool1dResult r;
    r.output = TensorF::zeros({c, out_len});
    r.argmax.resize(c * out_len);
    for (std::size_t ch = 0; ch < c; ++ch) {
        const double* in_row = &input.at(ch, 0);
        for (std::size_t t = 0; t < out_len; ++t) {
            const std::size_t a = 2 * t, b = 2 * t + 1;
            const bool first = in_row[a] >= in_row[b];  // tie -> lower index
            r.output.at(ch, t) = first ? in_row[a] : in_row[b];
            r.argmax[ch * out_len + t] = first ? a : b;
        }
    }
    return r;
}

TensorF maxpool1d_backward(const std::vector<std::size_t>& argmax,
                           const TensorF& upstream_grad, std::size_t input_len) {
    require_shape(upstream_grad.rank() == 2, "maxpool1d_backward: upstream must be C x L', got " +
                                                 shape_str(upstream_grad.shape));
    const std::size_t c = upstream_grad.dim(0), out_len = upstream_grad.dim(1);
    require_shape(argmax.size() == c * out_len,
                  "maxpool1d_backward: argmax size " + std::to_string(argmax.size()) +
                      " != " + std::to_string(c * out_len));
    TensorF d_input = TensorF::zeros({c, input_len});
    for (std::size_t ch = 0; ch < c; ++ch)
        for (std::size_t t = 0; t < out_len; ++t) {
            const std::size_t src = argmax[ch * out_len + t];
            if (src >= input_len)
                throw std::out_of_range("maxpool1d_backward: argmax index " +
                                        std::to_string(src) + " out of range " +
                                        std::to_string(input_len));
            d_input.at(ch, src) += upstream_grad.at(ch, t);
        }
    return d_input;
}

std::vector<double> dense_forward(const std::vector<double>& input,
                                  const TensorF& weights,
                                  const std::vector<double>& bias) {
    require_shape(weights.rank() == 2,
                  "dense: weights must be m x n, got " + shape_str(weights.shape));
    const std::size_t m = weights.dim(0), n = weights.dim(1);
    require_shape(input.size() == n, "dense: input size " + std::to_string(input.size()) +
                                         " != " + std::to_string(n));
    require_shape(bias.size() == m, "dense: bias size " + std::to_string(bias.size()) +
                                        " != " + std::to_string(m));
    std::vector<double> out(m);
    for (std::size_t r = 0; r < m; ++r) {
        const double* w = &weights.at(r, 0);
        double acc = bias[r];
        for (std::size_t cidx = 0; cidx < n; ++cidx) acc += w[cidx] * input[cidx];
        out[r] = acc;
    }
    return out;
}

DenseGrads dense_backward(const std::vector<double>& input, const TensorF& weights,
                          const std::vector<double>& upstream_grad) {
    require_shape(weights.rank() == 2,
                  "dense_backward: weights must be m x n, got " + shape_str(weights.shape));
    const std::size_t m = weights.dim(0), n = weights.dim(1);
    require_shape(input.size() == n, "dense_backward: input size " +
                                         std::to_string(input.size()) + " != " +
                                         std::to_string(n));
    require_shape(upstream_grad.size() == m,
                  "dense_backward: upstream size " + std::to_string(upstream_grad.size()) +
                      " != " + std::to_string(m));
    DenseGrads g;
    g.d_weights = TensorF::zeros({m, n});
    g.d_bias = upstream_grad;
    g.d_input.assign(n, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
        const double u = upstream_grad[r];
        double* dw = &g.d_weights.at(r, 0);
        const double* w = &weights.at(r, 0);
        for (std::size_t cidx = 0; cidx < n; ++cidx) {
            dw[cidx] = u * input[cidx];
            g.d_input[cidx] += w[cidx] * u;
        }
    }
    return g;
}

TensorF relu(const TensorF& x) {
    TensorF out = x;
    for (double& v : out.data) v = v > 0.0 ? v : 0.0;
    return out;
}

TensorF tanh_act(const TensorF& x) {
    TensorF out = x;
    for (double& v : out.data) v = std::tanh(v);
    return out;
}

std::vector<double> softmax(const std::vector<double>& x) {
    require_shape(!x.empty(), "softmax: empty input");
    const double mx = *std::max_element(x.begin(), x.end());
    std::vector<double> out(x.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = std::exp(x[i] - mx);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
}

namespace {

void check_attention_shapes(const std::vector<std::vector<double>>& states,
                            const TensorF& W, const std::vector<double>& b,
                            const std::vector<double>& v) {
    require_shape(!states.empty(), "attention: needs at least one state");
    require_shape(W.rank() == 2, "attention: W must be u x d, got " + shape_str(W.shape));
    const std::size_t u = W.dim(0), d = W.dim(1);
    require_shape(b.size() == u, "attention: b size " + std::to_string(b.size()) +
                                     " != u = " + std::to_string(u));
    require_shape(v.size() == u, "attention: v size " + std::to_string(v.size()) +
                                     " != u = " + std::to_string(u));
    for (const auto& h : states)
        require_shape(h.size() == d, "attention: state size " + std::to_string(h.size()) +
                                         " != d = " + std::to_string(d));
}

}  // namespace

AttentionOut additive_attention(const std::vector<std::vector<double>>& states,
                                const TensorF& W, const std::vector<double>& b,
                                const std::vector<double>& v) {
    check_attention_shapes(states, W, b, v);
    const std::size_t m = states.size();
    const std::size_t u = W.dim(0), d = W.dim(1);

    std::vector<double> scores(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double* h = states[i].data();
        double s = 0.0;
        for (std::size_t r = 0; r < u; ++r) {
            const double* wr = &W.at(r, 0);
            double z = b[r];
            for (std::size_t cidx = 0; cidx < d; ++cidx) z += wr[cidx] * h[cidx];
            s += v[r] * std::tanh(z);
        }
        scores[i] = s;
    }
    AttentionOut out;
    out.weights = softmax(scores);
    out.context.assign(d, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        const double a = out.weights[i];
        const double* h = states[i].data();
        for (std::size_t cidx = 0; cidx < d; ++cidx) out.context[cidx] += a * h[cidx];
    }
    return out;
}

AttentionGrads additive_attention_backward(
    const std::vector<std::vector<double>>& states, const TensorF& W,
    const std::vector<double>& b, const std::vector<double>& v,
    const std::vector<double>& upstream_grad) {
    check_attention_shapes(states, W, b, v);
    const std::size_t m = states.size();
    const std::size_t u = W.dim(0), d = W.dim(1);
    require_shape(upstream_grad.size() == d,
                  "attention_backward: upstream size " + std::to_string(upstream_grad.size()) +
                      " != d = " + std::to_string(d));

    // Recompute the forward intermediates.
    std::vector<std::vector<double>> tanh_z(m, std::vector<double>(u));
    std::vector<double> scores(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double* h = states[i].data();
        double s = 0.0;
        for (std::size_t r = 0; r < u; ++r) {
            const double* wr = &W.at(r, 0);
            double z = b[r];
            for (std::size_t cidx = 0; cidx < d; ++cidx) z += wr[cidx] * h[cidx];
            tanh_z[i][r] = std::tanh(z);
            s += v[r] * tanh_z[i][r];
        }
        scores[i] = s;
    }
    const std::vector<double> alpha = softmax(scores);

    // dL/dalpha_i = g . h_i; softmax jacobian gives dL/dscore.
    std::vector<double> d_alpha(m), d_score(m);
    double dot_alpha = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double acc = 0.0;
        for (std::size_t cidx = 0; cidx < d; ++cidx)
            acc += upstream_grad[cidx] * states[i][cidx];
        d_alpha[i] = acc;
        dot_alpha += alpha[i] * acc;
    }
    for (std::size_t i = 0; i < m; ++i) d_score[i] = alpha[i] * (d_alpha[i] - dot_alpha);

    AttentionGrads g;
    g.d_W = TensorF::zeros({u, d});
    g.d_b.assign(u, 0.0);
    g.d_v.assign(u, 0.0);
    g.d_states.assign(m, std::vector<double>(d, 0.0));

    for (std::size_t i = 0; i < m; ++i) {
        const double* h = states[i].data();
        double* dh = g.d_states[i].data();
        // context path
        for (std::size_t cidx = 0; cidx < d; ++cidx) dh[cidx] = alpha[i] * upstream_grad[cidx];
        // score path: dz_r = d_score_i * v_r * (1 - tanh^2)
        for (std::size_t r = 0; r < u; ++r) {
            const double th = tanh_z[i][r];
            g.d_v[r] += d_score[i] * th;
            const double dz = d_score[i] * v[r] * (1.0 - th * th);
            if (dz == 0.0) continue;
            g.d_b[r] += dz;
            double* dwr = &g.d_W.at(r, 0);
            const double* wr = &W.at(r, 0);
            for (std::size_t cidx = 0; cidx < d; ++cidx) {
                dwr[cidx] += dz * h[cidx];
                dh[cidx] += dz * wr[cidx];
            }
        }
    }
    return g;
}

DropoutResult dropout_with_mask(const TensorF& x, double rate, bool training, Rng* rng) {
    if (rate < 0.0 || rate >= 1.0)
        throw std::invalid_argument("dropout: rate must be in [0,1), got " +
                                    std::to_string(rate));
    DropoutResult r;
    if (!training || rate == 0.0) {
        r.output = x;
        return r;
    }
    if (!rng) throw std::invalid_argument("dropout: training mode needs an rng");
    const double scale = 1.0 / (1.0 - rate);
    r.output = x;
    r.mask.resize(x.data.size());
    for (std::size_t i = 0; i < x.data.size(); ++i) {
        const bool keep = rng->uniform() >= rate;
        r.mask[i] = keep ? scale : 0.0;
        r.output.data[i] *= r.mask[i];
    }
    return r;
}

TensorF dropout(const TensorF& x, double rate, bool training, Rng& rng) {
    return dropout_with_mask(x, rate, training, &rng).output;
}

CrossEntropyOut softmax_cross_entropy(const std::vector<double>& logits, int true_class) {
    if (true_class < 0 || static_cast<std::size_t>(true_class) >= logits.size())
        throw std::out_of_range("softmax_cross_entropy: class " + std::to_string(true_class) +
                                " out of range for " + std::to_string(logits.size()) +
                                " logits");
    CrossEntropyOut out;
    out.probs = softmax(logits);
    // loss from the log-sum-exp form, not log(probs), for small-prob accuracy
    const double mx = *std::max_element(logits.begin(), logits.end());
    double lse = 0.0;
    for (double x : logits) lse += std::exp(x - mx);
    out.loss = mx + std::log(lse) - logits[static_cast<std::size_t>(true_class)];
    out.d_logits = out.probs;
    out.d_logits[static_cast<std::size_t>(true_class)] -= 1.0;
    return out;
}

}  // namespace limbnet
