#include "limbnet/train.hpp"

#include <sys/utsname.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace limbnet {

void TrainConfig::validate() const {
    if (batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
}

namespace {

void check_labels(const std::vector<WindowFrame>& frames, std::size_t n_classes) {
    for (const auto& f : frames)
        if (f.label < 0 || static_cast<std::size_t>(f.label) >= n_classes)
            throw std::invalid_argument("train: frame label " + std::to_string(f.label) +
                                        " outside [0," + std::to_string(n_classes) + ")");
}

struct PartitionStats {
    double loss = 0.0;
    double accuracy = 0.0;
};

// Eval-mode mean cross-entropy and accuracy over a partition.
PartitionStats partition_stats(const ModelWeights& weights,
                               const std::vector<WindowFrame>& frames) {
    PartitionStats s;
    if (frames.empty()) return s;
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (const auto& f : frames) {
        const ForwardResult r = forward(weights, f.data, RunMode::eval, nullptr);
        const double p = std::max(r.probs.probabilities[static_cast<std::size_t>(f.label)],
                                  1e-300);
        loss_sum += -std::log(p);
        if (r.probs.predicted_class == static_cast<std::size_t>(f.label)) ++correct;
    }
    s.loss = loss_sum / static_cast<double>(frames.size());
    s.accuracy = static_cast<double>(correct) / static_cast<double>(frames.size());
    return s;
}

}  // namespace

TrainResult train(ModelWeights weights, const std::vector<WindowFrame>& train_frames,
                  const std::vector<WindowFrame>& val_frames, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
    config.validate();
    if (train_frames.empty()) throw std::invalid_argument("train: empty training set");
    const std::size_t n_classes = weights.config.n_classes;
    check_labels(train_frames, n_classes);
    check_labels(val_frames, n_classes);

    Rng root(config.seed);
    Rng shuffle_rng = root.fork(1);
    Rng dropout_rng = root.fork(2);

    AdamState state(weights.scalar_count());
    long t = 0;

    std::vector<std::size_t> order(train_frames.size());
    std::iota(order.begin(), order.end(), 0);

    TrainResult result;
    result.epochs.reserve(config.epochs);

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle_rng.shuffle(order);

        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            ModelGrads batch_grads = zeros_like(weights);
            for (std::size_t i = start; i < end; ++i) {
                const WindowFrame& f = train_frames[order[i]];
                ForwardResult r = forward(weights, f.data, RunMode::train, &dropout_rng);
                const CrossEntropyOut ce =
                    softmax_cross_entropy(r.cache.logits, f.label);
                ModelGrads g = backward(weights, r.cache, ce.d_logits);
                accumulate(batch_grads, g);
            }
            scale(batch_grads, 1.0 / static_cast<double>(end - start));

            std::vector<double> params = weights.flatten();
            const std::vector<double> grads = batch_grads.flatten();
            adam_step(params, grads, state, config.adam, ++t);
            weights.unflatten(params);
        }

        EpochStats es;
        es.epoch = epoch;
        const PartitionStats tr = partition_stats(weights, train_frames);
        const PartitionStats va = partition_stats(weights, val_frames);
        es.train_loss = tr.loss;
        es.train_accuracy = tr.accuracy;
        es.val_loss = va.loss;
        es.val_accuracy = va.accuracy;
        result.epochs.push_back(es);
        if (on_epoch) on_epoch(es);
    }

    result.weights = std::move(weights);
    return result;
}

EvalResult evaluate(const ModelWeights& weights, const std::vector<WindowFrame>& frames) {
    if (frames.empty()) throw std::invalid_argument("evaluate: empty frame list");
    const std::size_t n_classes = weights.config.n_classes;
    check_labels(frames, n_classes);

    EvalResult res;
    res.confusion = ConfusionMatrix(n_classes);
    res.probs.reserve(frames.size());
    res.labels.reserve(frames.size());

    double loss_sum = 0.0;
    for (const auto& f : frames) {
        ForwardResult r = forward(weights, f.data, RunMode::eval, nullptr);
        const double p = std::max(r.probs.probabilities[static_cast<std::size_t>(f.label)],
                                  1e-300);
        loss_sum += -std::log(p);
        res.confusion.at(static_cast<std::size_t>(f.label), r.probs.predicted_class)++;
        res.labels.push_back(f.label);
        res.probs.push_back(std::move(r.probs));
    }
    res.mean_loss = loss_sum / static_cast<double>(frames.size());
    res.accuracy = static_cast<double>(res.confusion.diagonal()) /
                   static_cast<double>(res.confusion.total());
    return res;
}

// ======================================================================
// Latency benchmark
// ======================================================================

HostInfo host_info() {
    HostInfo info;
    info.cpu = "unknown";
    std::ifstream cpuinfo("/proc/cpuinfo");
    std::string line;
    while (std::getline(cpuinfo, line)) {
        const auto pos = line.find("model name");
        if (pos == 0) {
            const auto colon = line.find(':');
            if (colon != std::string::npos) {
                std::string name = line.substr(colon + 1);
                const auto first = name.find_first_not_of(" \t");
                info.cpu = first == std::string::npos ? name : name.substr(first);
            }
            break;
        }
    }
    utsname uts{};
    if (uname(&uts) == 0)
        info.os = std::string(uts.sysname) + " " + uts.release + " " + uts.machine;
    else
        info.os = "unknown";
    return info;
}

LatencyStats latency_benchmark(const ModelWeights& weights, std::size_t n_iters,
                               std::size_t warmup_iters, Rng& rng) {
    if (n_iters == 0) throw std::invalid_argument("bench: n_iters must be >= 1");
    const std::size_t c = weights.config.n_channels;
    const std::size_t n = weights.config.window_len;

    auto random_window = [&]() {
        TensorF w = TensorF::zeros({c, n});
        for (double& x : w.data) x = rng.uniform(-1.0, 1.0);
        return w;
    };

    for (std::size_t i = 0; i < warmup_iters; ++i) {
        const TensorF w = random_window();
        (void)forward(weights, w, RunMode::eval, nullptr);
    }

    std::vector<double> samples_ms;
    samples_ms.reserve(n_iters);
    for (std::size_t i = 0; i < n_iters; ++i) {
        const TensorF w = random_window();
        const auto t0 = std::chrono::steady_clock::now();
        const ForwardResult r = forward(weights, w, RunMode::eval, nullptr);
        const auto t1 = std::chrono::steady_clock::now();
        // Keep the result observable so the pass cannot be elided.
        if (r.probs.probabilities.empty()) throw std::runtime_error("bench: empty output");
        samples_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }

    std::vector<double> sorted = samples_ms;
    std::sort(sorted.begin(), sorted.end());
    auto nearest_rank = [&](double q) {
        const auto idx = static_cast<std::size_t>(
            std::ceil(q * static_cast<double>(sorted.size()))) ;
        return sorted[std::min(sorted.size() - 1, idx == 0 ? 0 : idx - 1)];
    };

    LatencyStats stats;
    stats.n_iters = n_iters;
    stats.mean_ms = std::accumulate(samples_ms.begin(), samples_ms.end(), 0.0) /
                    static_cast<double>(samples_ms.size());
    stats.p50_ms = nearest_rank(0.50);
    stats.p99_ms = nearest_rank(0.99);
    stats.host = host_info();
    return stats;
}

}  // namespace limbnet
