#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "limbnet/dataset.hpp"
#include "limbnet/pipeline.hpp"
#include "limbnet/train.hpp"

namespace limbnet {

struct ExperimentConfig {
    ModelConfig model;
    TrainConfig train;
    std::size_t stride = 192;
    bool run_latency = true;
    std::size_t latency_iters = 200;
    std::size_t latency_warmup = 20;
};

struct ExperimentReport {
    ExperimentConfig config;
    LabelMap label_map;
    SplitPlan split;
    ParamBreakdown params;
    std::vector<EpochStats> epochs;
    MetricsReport val_metrics;   // AUC filled from the val partition
    MetricsReport test_metrics;  // AUC filled from the test partition
    ConfusionMatrix confusion_val;
    ConfusionMatrix confusion_test;
    std::vector<RocCurve> roc;  // test-partition curves, one per class
    bool has_latency = false;
    LatencyStats latency;
    ModelWeights weights;  // final trained weights (not part of the JSON)
};

// pipeline -> train -> evaluate on val and test with the final weights.
// One progress line per epoch goes to `log` when non-null.
ExperimentReport run_experiment(const Dataset& dataset, const SplitPlan& split,
                                const ExperimentConfig& config,
                                std::ostream* log = nullptr);

// JSON artifact, schema "report_version": 1. Key order is alphabetical
// (library behavior), so identical runs serialize identically; latency
// is the only non-deterministic section.
std::string report_to_json(const ExperimentReport& report);

}  // namespace limbnet
