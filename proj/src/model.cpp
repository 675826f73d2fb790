#include "limbnet/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace limbnet {

// ======================================================================
// ModelConfig
// ======================================================================

void ModelConfig::validate() const {
    if (window_len == 0) throw std::invalid_argument("config: window_len must be > 0");
    if (n_channels == 0) throw std::invalid_argument("config: n_channels must be > 0");
    if (convs.empty()) throw std::invalid_argument("config: need at least one conv layer");
    if (pool_window != 2) throw std::invalid_argument("config: pool_window must be 2");
    if (n_attention_heads < 1)
        throw std::invalid_argument("config: n_attention_heads must be >= 1");
    if (n_classes < 2) throw std::invalid_argument("config: n_classes must be >= 2");
    if (dense_hidden == 0) throw std::invalid_argument("config: dense_hidden must be > 0");
    if (attention_dim == 0) throw std::invalid_argument("config: attention_dim must be > 0");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0)
        throw std::invalid_argument("config: dropout_rate must be in [0,1)");
    for (const auto& c : convs) {
        if (c.kernel_size == 0 || c.out_channels == 0)
            throw std::invalid_argument("config: conv spec with zero kernel or channels");
        if (padding == Padding::same && c.kernel_size % 2 == 0)
            throw std::invalid_argument("config: same padding needs odd kernel sizes");
    }
    if (padding == Padding::same) {
        std::size_t div = 1;
        for (std::size_t i = 0; i < convs.size(); ++i) div *= pool_window;
        if (window_len % div != 0)
            throw std::invalid_argument("config: window_len " + std::to_string(window_len) +
                                        " not divisible by pool_window^" +
                                        std::to_string(convs.size()));
    }
    // Every pool stage needs at least 2 samples.
    for (std::size_t len : branch_lengths())
        if (len == 0)
            throw std::invalid_argument("config: window too short for the conv/pool stack");
}

std::vector<std::size_t> ModelConfig::branch_lengths() const {
    std::vector<std::size_t> lens;
    std::size_t len = window_len;
    for (const auto& c : convs) {
        if (padding == Padding::valid) {
            if (c.kernel_size > len) return {0};
            len = len - c.kernel_size + 1;
        }
        len /= pool_window;
        lens.push_back(len);
    }
    return lens;
}

std::size_t ModelConfig::branch_flat_dim() const {
    const auto lens = branch_lengths();
    return convs.back().out_channels * lens.back();
}

std::size_t ModelConfig::concat_dim() const {
    return n_attention_heads * branch_flat_dim();
}

// ======================================================================
// ModelWeights bookkeeping
// ======================================================================

std::size_t ModelWeights::scalar_count() const {
    std::size_t n = 0;
    for_each_block([&](const double*, std::size_t k) { n += k; });
    return n;
}

bool ModelWeights::all_finite() const {
    bool ok = true;
    for_each_block([&](const double* p, std::size_t k) {
        for (std::size_t i = 0; i < k; ++i)
            if (!std::isfinite(p[i])) ok = false;
    });
    return ok;
}

std::vector<double> ModelWeights::flatten() const {
    std::vector<double> flat;
    flat.reserve(scalar_count());
    for_each_block([&](const double* p, std::size_t k) { flat.insert(flat.end(), p, p + k); });
    return flat;
}

void ModelWeights::unflatten(const std::vector<double>& flat) {
    if (flat.size() != scalar_count())
        throw std::invalid_argument("unflatten: got " + std::to_string(flat.size()) +
                                    " scalars, layout holds " + std::to_string(scalar_count()));
    std::size_t off = 0;
    for_each_block([&](double* p, std::size_t k) {
        std::copy(flat.begin() + static_cast<std::ptrdiff_t>(off),
                  flat.begin() + static_cast<std::ptrdiff_t>(off + k), p);
        off += k;
    });
}

ModelWeights zeros_like(const ModelWeights& w) {
    ModelWeights z = w;
    z.for_each_block([](double* p, std::size_t k) { std::fill(p, p + k, 0.0); });
    return z;
}

void accumulate(ModelGrads& into, const ModelGrads& g) {
    std::vector<std::pair<const double*, std::size_t>> src;
    g.for_each_block([&](const double* p, std::size_t k) { src.emplace_back(p, k); });
    std::size_t idx = 0;
    into.for_each_block([&](double* p, std::size_t k) {
        if (idx >= src.size() || src[idx].second != k)
            throw std::invalid_argument("accumulate: gradient layouts differ");
        const double* q = src[idx].first;
        for (std::size_t i = 0; i < k; ++i) p[i] += q[i];
        ++idx;
    });
}

void scale(ModelGrads& g, double s) {
    g.for_each_block([&](double* p, std::size_t k) {
        for (std::size_t i = 0; i < k; ++i) p[i] *= s;
    });
}

// ======================================================================
// Parameter accounting
// ======================================================================

ParamBreakdown parameter_count(const ModelConfig& config) {
    config.validate();
    ParamBreakdown out;
    std::size_t per_branch = 0;
    std::size_t in_ch = 1;
    for (const auto& c : config.convs) {
        per_branch += c.out_channels * in_ch * c.kernel_size + c.out_channels;
        in_ch = c.out_channels;
    }
    out.blocks.emplace_back("conv branches (" + std::to_string(config.n_channels) + " x " +
                                std::to_string(per_branch) + ")",
                            config.n_channels * per_branch);
    const std::size_t d = config.branch_flat_dim();
    const std::size_t u = config.attention_dim;
    const std::size_t per_head = u * d + u + u;
    out.blocks.emplace_back("attention heads (" + std::to_string(config.n_attention_heads) +
                                " x " + std::to_string(per_head) + ")",
                            config.n_attention_heads * per_head);
    out.blocks.emplace_back("dense hidden",
                            config.concat_dim() * config.dense_hidden + config.dense_hidden);
    out.blocks.emplace_back("output layer",
                            config.dense_hidden * config.n_classes + config.n_classes);
    for (const auto& [name, n] : out.blocks) out.total += n;
    return out;
}

std::string ParamBreakdown::to_string() const {
    std::ostringstream os;
    for (const auto& [name, n] : blocks) os << "  " << name << ": " << n << "\n";
    os << "  total: " << total;
    return os.str();
}

// ======================================================================
// Initialization
// ======================================================================

namespace {

void glorot_fill(TensorF& t, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& w : t.data) w = rng.uniform(-limit, limit);
}

}  // namespace

ModelWeights build_model(const ModelConfig& config, Rng& rng) {
    config.validate();
    ModelWeights w;
    w.config = config;
    w.branches.resize(config.n_channels);
    for (auto& branch : w.branches) {
        branch.resize(config.convs.size());
        std::size_t in_ch = 1;
        for (std::size_t l = 0; l < config.convs.size(); ++l) {
            const auto& spec = config.convs[l];
            branch[l].kernels = TensorF::zeros({spec.out_channels, in_ch, spec.kernel_size});
            glorot_fill(branch[l].kernels, in_ch * spec.kernel_size,
                        spec.out_channels * spec.kernel_size, rng);
            branch[l].bias.assign(spec.out_channels, 0.0);
            in_ch = spec.out_channels;
        }
    }
    const std::size_t d = config.branch_flat_dim();
    const std::size_t u = config.attention_dim;
    w.heads.resize(config.n_attention_heads);
    for (auto& h : w.heads) {
        h.W = TensorF::zeros({u, d});
        glorot_fill(h.W, d, u, rng);
        h.b.assign(u, 0.0);
        TensorF vt = TensorF::zeros({u});
        glorot_fill(vt, u, 1, rng);
        h.v = vt.data;
    }
    w.hidden.weights = TensorF::zeros({config.dense_hidden, config.concat_dim()});
    glorot_fill(w.hidden.weights, config.concat_dim(), config.dense_hidden, rng);
    w.hidden.bias.assign(config.dense_hidden, 0.0);
    w.output.weights = TensorF::zeros({config.n_classes, config.dense_hidden});
    glorot_fill(w.output.weights, config.dense_hidden, config.n_classes, rng);
    w.output.bias.assign(config.n_classes, 0.0);
    return w;
}

ModelWeights build_model(const ModelConfig& config) {
    Rng rng(config.seed);
    return build_model(config, rng);
}

// ======================================================================
// Forward
// ======================================================================

ForwardResult forward(const ModelWeights& weights, const TensorF& window,
                      RunMode mode, Rng* rng) {
    const ModelConfig& cfg = weights.config;
    require_shape(window.rank() == 2 && window.dim(0) == cfg.n_channels &&
                      window.dim(1) == cfg.window_len,
                  "forward: window must be " + shape_str({cfg.n_channels, cfg.window_len}) +
                      ", got " + shape_str(window.shape));
    const bool training = mode == RunMode::train;
    if (training && !rng)
        throw std::invalid_argument("forward: train mode needs an rng for dropout");

    ForwardResult res;
    ForwardCache& cache = res.cache;
    cache.valid = training;
    if (training) cache.window = window;

    const std::size_t n_convs = cfg.convs.size();
    std::vector<std::vector<double>> states(cfg.n_channels);
    if (training) cache.branch.resize(cfg.n_channels);

    for (std::size_t ch = 0; ch < cfg.n_channels; ++ch) {
        TensorF x = TensorF::zeros({1, cfg.window_len});
        std::copy(&window.at(ch, 0), &window.at(ch, 0) + cfg.window_len, x.data.begin());

        ForwardCache::BranchCache* bc = training ? &cache.branch[ch] : nullptr;
        if (bc) {
            bc->conv_in.resize(n_convs);
            bc->relu_out.resize(n_convs);
            bc->pool_argmax.resize(n_convs);
            bc->pool_in_len.resize(n_convs);
        }
        for (std::size_t l = 0; l < n_convs; ++l) {
            if (bc) bc->conv_in[l] = x;
            TensorF z = conv1d_forward(x, weights.branches[ch][l].kernels,
                                       weights.branches[ch][l].bias, cfg.padding);
            TensorF a = relu(z);
            if (bc) {
                bc->relu_out[l] = a;
                bc->pool_in_len[l] = a.dim(1);
            }
            MaxPool1dResult p = maxpool1d_forward(a);
            if (bc) bc->pool_argmax[l] = std::move(p.argmax);
            x = std::move(p.output);
        }
        // Flatten channel-major.
        states[ch] = std::move(x.data);
        if (bc) bc->flat = states[ch];
    }
    if (training) cache.states = states;

    const std::size_t d = cfg.branch_flat_dim();
    std::vector<double> concat;
    concat.reserve(cfg.n_attention_heads * d);
    for (const auto& head : weights.heads) {
        AttentionOut att = additive_attention(states, head.W, head.b, head.v);
        concat.insert(concat.end(), att.context.begin(), att.context.end());
    }
    if (training) cache.concat = concat;

    TensorF concat_t({concat.size()}, concat);
    DropoutResult drop1 = dropout_with_mask(concat_t, cfg.dropout_rate, training, rng);
    if (training) {
        cache.dropout1_mask = drop1.mask;
        cache.dropped = drop1.output.data;
    }

    std::vector<double> hidden_pre =
        dense_forward(drop1.output.data, weights.hidden.weights, weights.hidden.bias);
    std::vector<double> hidden_act = hidden_pre;
    for (double& v : hidden_act) v = v > 0.0 ? v : 0.0;
    if (training) {
        cache.hidden_pre = hidden_pre;
        cache.hidden_act = hidden_act;
    }

    std::vector<double> logits_pre =
        dense_forward(hidden_act, weights.output.weights, weights.output.bias);
    if (training) cache.logits_pre = logits_pre;

    TensorF logits_t({logits_pre.size()}, logits_pre);
    DropoutResult drop2 = dropout_with_mask(logits_t, cfg.dropout_rate, training, rng);
    if (training) {
        cache.dropout2_mask = drop2.mask;
        cache.logits = drop2.output.data;
    }

    res.probs.probabilities = softmax(drop2.output.data);
    res.probs.predicted_class = static_cast<std::size_t>(
        std::max_element(res.probs.probabilities.begin(), res.probs.probabilities.end()) -
        res.probs.probabilities.begin());
    return res;
}

// ======================================================================
// Backward
// ======================================================================

ModelGrads backward(const ModelWeights& weights, const ForwardCache& cache,
                    const std::vector<double>& d_logits) {
    if (!cache.valid)
        throw std::invalid_argument("backward: cache missing; run a train-mode forward first");
    const ModelConfig& cfg = weights.config;
    require_shape(d_logits.size() == cfg.n_classes,
                  "backward: d_logits size " + std::to_string(d_logits.size()) + " != " +
                      std::to_string(cfg.n_classes));

    ModelGrads grads = zeros_like(weights);

    // Logit dropout.
    std::vector<double> d_logits_pre = d_logits;
    if (!cache.dropout2_mask.empty())
        for (std::size_t i = 0; i < d_logits_pre.size(); ++i)
            d_logits_pre[i] *= cache.dropout2_mask[i];

    // Output dense.
    DenseGrads g_out = dense_backward(cache.hidden_act, weights.output.weights, d_logits_pre);
    grads.output.weights = std::move(g_out.d_weights);
    grads.output.bias = std::move(g_out.d_bias);

    // Hidden ReLU.
    std::vector<double> d_hidden_pre = std::move(g_out.d_input);
    for (std::size_t i = 0; i < d_hidden_pre.size(); ++i)
        if (cache.hidden_pre[i] <= 0.0) d_hidden_pre[i] = 0.0;

    // Hidden dense.
    DenseGrads g_hid = dense_backward(cache.dropped, weights.hidden.weights, d_hidden_pre);
    grads.hidden.weights = std::move(g_hid.d_weights);
    grads.hidden.bias = std::move(g_hid.d_bias);

    // Concat dropout.
    std::vector<double> d_concat = std::move(g_hid.d_input);
    if (!cache.dropout1_mask.empty())
        for (std::size_t i = 0; i < d_concat.size(); ++i)
            d_concat[i] *= cache.dropout1_mask[i];

    // Attention heads: slice the concat gradient, accumulate state grads.
    const std::size_t d = cfg.branch_flat_dim();
    std::vector<std::vector<double>> d_states(cfg.n_channels, std::vector<double>(d, 0.0));
    for (std::size_t h = 0; h < weights.heads.size(); ++h) {
        std::vector<double> up(d_concat.begin() + static_cast<std::ptrdiff_t>(h * d),
                               d_concat.begin() + static_cast<std::ptrdiff_t>((h + 1) * d));
        AttentionGrads ag = additive_attention_backward(
            cache.states, weights.heads[h].W, weights.heads[h].b, weights.heads[h].v, up);
        grads.heads[h].W = std::move(ag.d_W);
        grads.heads[h].b = std::move(ag.d_b);
        grads.heads[h].v = std::move(ag.d_v);
        for (std::size_t s = 0; s < cfg.n_channels; ++s)
            for (std::size_t j = 0; j < d; ++j) d_states[s][j] += ag.d_states[s][j];
    }

    // Branches, in reverse layer order.
    const std::size_t n_convs = cfg.convs.size();
    for (std::size_t ch = 0; ch < cfg.n_channels; ++ch) {
        const auto& bc = cache.branch[ch];
        TensorF d_x({cfg.convs.back().out_channels, d / cfg.convs.back().out_channels},
                    d_states[ch]);
        for (std::size_t l = n_convs; l-- > 0;) {
            TensorF d_relu = maxpool1d_backward(bc.pool_argmax[l], d_x, bc.pool_in_len[l]);
            // ReLU gate: relu_out > 0 exactly where pre-activation > 0.
            for (std::size_t i = 0; i < d_relu.data.size(); ++i)
                if (bc.relu_out[l].data[i] <= 0.0) d_relu.data[i] = 0.0;
            Conv1dGrads cg = conv1d_backward(bc.conv_in[l], weights.branches[ch][l].kernels,
                                             d_relu, cfg.padding);
            grads.branches[ch][l].kernels = std::move(cg.d_kernels);
            grads.branches[ch][l].bias = std::move(cg.d_bias);
            d_x = std::move(cg.d_input);
        }
    }
    return grads;
}

}  // namespace limbnet
