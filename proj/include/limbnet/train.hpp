#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "limbnet/metrics.hpp"
#include "limbnet/model.hpp"
#include "limbnet/optimizer.hpp"
#include "limbnet/pipeline.hpp"

namespace limbnet {

// ======================================================================
// Training
// ======================================================================

struct TrainConfig {
    std::size_t epochs = 50;
    std::size_t batch_size = 32;
    AdamConfig adam;
    std::uint64_t seed = 1;
    DenoiseConfig denoise;  // applied upstream in the pipeline; echoed in reports

    void validate() const;  // batch_size >= 1
};

struct EpochStats {
    std::size_t epoch = 0;        // 0-based
    double train_loss = 0.0;
    double train_accuracy = 0.0;  // fraction in [0,1]
    double val_loss = 0.0;
    double val_accuracy = 0.0;
};

struct TrainResult {
    ModelWeights weights;
    std::vector<EpochStats> epochs;
};

// Mini-batch Adam over per-epoch reshuffled frames. Epoch stats are
// eval-mode passes over each full partition at epoch end, so dropout
// noise never touches the curves. Deterministic given (seed, data,
// config); an empty val set yields zero val stats. on_epoch, when set,
// fires after each epoch's stats are recorded.
using EpochCallback = std::function<void(const EpochStats&)>;

TrainResult train(ModelWeights weights, const std::vector<WindowFrame>& train_frames,
                  const std::vector<WindowFrame>& val_frames, const TrainConfig& config,
                  const EpochCallback& on_epoch = nullptr);

// ======================================================================
// Evaluation
// ======================================================================

struct EvalResult {
    ConfusionMatrix confusion;
    std::vector<ClassProbs> probs;  // per frame, in input order
    std::vector<int> labels;        // matching true labels
    double mean_loss = 0.0;
    double accuracy = 0.0;          // fraction
};

// Eval-mode forward per frame; argmax fills the matrix. Throws on an
// empty frame list or out-of-range labels.
EvalResult evaluate(const ModelWeights& weights, const std::vector<WindowFrame>& frames);

// ======================================================================
// Latency benchmark
// ======================================================================

struct HostInfo {
    std::string cpu;
    std::string os;
};

HostInfo host_info();

struct LatencyStats {
    double mean_ms = 0.0;
    double p50_ms = 0.0;
    double p99_ms = 0.0;
    std::size_t n_iters = 0;
    HostInfo host;
};

// Times eval-mode forwards on freshly drawn random windows; window
// generation stays outside the timed section. Throws when n_iters == 0.
LatencyStats latency_benchmark(const ModelWeights& weights, std::size_t n_iters,
                               std::size_t warmup_iters, Rng& rng);

}  // namespace limbnet
