#include "limbnet/experiment.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

#include "json.hpp"

namespace limbnet {

using nlohmann::json;

ExperimentReport run_experiment(const Dataset& dataset, const SplitPlan& split,
                                const ExperimentConfig& config, std::ostream* log) {
    config.model.validate();
    config.train.validate();
    dataset.label_map.validate();

    PipelineConfig pipe;
    pipe.window_len = config.model.window_len;
    pipe.stride = config.stride;
    pipe.denoise = config.train.denoise;

    std::vector<WindowFrame> train_frames =
        extract_frames(dataset, split.train_subjects, pipe);
    std::vector<WindowFrame> val_frames = extract_frames(dataset, split.val_subjects, pipe);
    std::vector<WindowFrame> test_frames =
        extract_frames(dataset, split.test_subjects, pipe);

    if (log)
        *log << "frames: train=" << train_frames.size() << " val=" << val_frames.size()
             << " test=" << test_frames.size() << "\n";

    ExperimentReport report;
    report.config = config;
    report.label_map = dataset.label_map;
    report.split = split;
    report.params = parameter_count(config.model);

    ModelWeights init = build_model(config.model);

    EpochCallback on_epoch;
    if (log) {
        on_epoch = [log](const EpochStats& es) {
            *log << "epoch " << std::setw(3) << es.epoch
                 << "  train_loss=" << std::fixed << std::setprecision(4) << es.train_loss
                 << "  train_acc=" << std::setprecision(4) << es.train_accuracy
                 << "  val_loss=" << std::setprecision(4) << es.val_loss
                 << "  val_acc=" << std::setprecision(4) << es.val_accuracy << "\n";
            log->flush();
        };
    }

    TrainResult trained =
        train(std::move(init), train_frames, val_frames, config.train, on_epoch);
    report.epochs = std::move(trained.epochs);

    const EvalResult val_eval = evaluate(trained.weights, val_frames);
    const EvalResult test_eval = evaluate(trained.weights, test_frames);
    report.confusion_val = val_eval.confusion;
    report.confusion_test = test_eval.confusion;
    report.val_metrics = metrics_from_confusion(val_eval.confusion);
    report.test_metrics = metrics_from_confusion(test_eval.confusion);

    const std::size_t n_classes = config.model.n_classes;
    report.val_metrics.auc.resize(n_classes);
    report.test_metrics.auc.resize(n_classes);
    for (std::size_t c = 0; c < n_classes; ++c) {
        report.val_metrics.auc[c] =
            roc_auc(val_eval.probs, val_eval.labels, static_cast<int>(c)).auc;
        RocCurve curve = roc_auc(test_eval.probs, test_eval.labels, static_cast<int>(c));
        report.test_metrics.auc[c] = curve.auc;
        report.roc.push_back(std::move(curve));
    }

    if (config.run_latency) {
        Rng bench_rng(config.train.seed ^ 0x9e3779b97f4a7c15ULL);
        report.latency = latency_benchmark(trained.weights, config.latency_iters,
                                           config.latency_warmup, bench_rng);
        report.has_latency = true;
    }

    report.weights = std::move(trained.weights);
    return report;
}

// ======================================================================
// JSON serialization
// ======================================================================

namespace {

json label_map_json(const LabelMap& lm) {
    json j = json::array();
    for (std::size_t i = 0; i < lm.classes.size(); ++i)
        j.push_back({{"index", i}, {"activity", to_string(lm.classes[i])}});
    return j;
}

json model_config_json(const ModelConfig& m) {
    json convs = json::array();
    for (const auto& c : m.convs)
        convs.push_back({{"kernel_size", c.kernel_size}, {"out_channels", c.out_channels}});
    return {{"window_len", m.window_len},
            {"n_channels", m.n_channels},
            {"convs", convs},
            {"pool_window", m.pool_window},
            {"padding", m.padding == Padding::same ? "same" : "valid"},
            {"attention_dim", m.attention_dim},
            {"n_attention_heads", m.n_attention_heads},
            {"dense_hidden", m.dense_hidden},
            {"n_classes", m.n_classes},
            {"dropout_rate", m.dropout_rate},
            {"seed", m.seed}};
}

json train_config_json(const TrainConfig& t) {
    return {{"epochs", t.epochs},
            {"batch_size", t.batch_size},
            {"adam",
             {{"lr", t.adam.lr},
              {"beta1", t.adam.beta1},
              {"beta2", t.adam.beta2},
              {"eps", t.adam.eps}}},
            {"seed", t.seed},
            {"denoise",
             {{"enabled", t.denoise.enabled},
              {"wavelet", to_string(t.denoise.wavelet)},
              {"levels", t.denoise.levels},
              {"threshold_rule", "universal_soft"}}}};
}

json subjects_json(const std::set<std::string>& ids) {
    return json(std::vector<std::string>(ids.begin(), ids.end()));
}

json confusion_json(const ConfusionMatrix& m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.n_classes; ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < m.n_classes; ++c) row.push_back(m.at(r, c));
        rows.push_back(row);
    }
    return rows;
}

json metrics_json(const MetricsReport& rep) {
    return {{"precision_pct", rep.precision_pct},
            {"recall_pct", rep.recall_pct},
            {"f1_pct", rep.f1_pct},
            {"accuracy_pct", rep.accuracy_pct},
            {"balanced_accuracy_pct", rep.balanced_accuracy_pct},
            {"auc", rep.auc},
            {"zero_denominator", rep.zero_denominator}};
}

}  // namespace

std::string report_to_json(const ExperimentReport& report) {
    json j;
    j["report_version"] = 1;

    j["config"] = {{"model", model_config_json(report.config.model)},
                   {"train", train_config_json(report.config.train)},
                   {"stride", report.config.stride},
                   {"label_map", label_map_json(report.label_map)}};

    j["split"] = {{"train", subjects_json(report.split.train_subjects)},
                  {"val", subjects_json(report.split.val_subjects)},
                  {"test", subjects_json(report.split.test_subjects)}};

    json blocks = json::array();
    for (const auto& [name, count] : report.params.blocks)
        blocks.push_back({{"name", name}, {"count", count}});
    j["parameter_count"] = {{"blocks", blocks}, {"total", report.params.total}};

    json epochs = json::array();
    for (const auto& e : report.epochs)
        epochs.push_back({{"epoch", e.epoch},
                          {"train_loss", e.train_loss},
                          {"train_accuracy", e.train_accuracy},
                          {"val_loss", e.val_loss},
                          {"val_accuracy", e.val_accuracy}});
    j["epochs"] = epochs;

    j["val_metrics"] = metrics_json(report.val_metrics);
    j["test_metrics"] = metrics_json(report.test_metrics);
    j["confusion_val"] = confusion_json(report.confusion_val);
    j["confusion_test"] = confusion_json(report.confusion_test);

    json roc = json::array();
    for (const auto& curve : report.roc) {
        json points = json::array();
        for (const auto& p : curve.points) points.push_back({p.fpr, p.tpr});
        json thresholds = json::array();  // leading +inf anchor becomes null
        for (double t : curve.thresholds)
            thresholds.push_back(std::isfinite(t) ? json(t) : json(nullptr));
        roc.push_back({{"class_index", curve.class_index},
                       {"activity", to_string(report.label_map.activity_of(curve.class_index))},
                       {"auc", curve.auc},
                       {"points", points},
                       {"thresholds", thresholds}});
    }
    j["roc"] = roc;

    if (report.has_latency)
        j["latency"] = {{"mean_ms", report.latency.mean_ms},
                        {"p50_ms", report.latency.p50_ms},
                        {"p99_ms", report.latency.p99_ms},
                        {"n_iters", report.latency.n_iters},
                        {"host",
                         {{"cpu", report.latency.host.cpu}, {"os", report.latency.host.os}}}};
    else
        j["latency"] = nullptr;

    return j.dump(2) + "\n";
}

}  // namespace limbnet
