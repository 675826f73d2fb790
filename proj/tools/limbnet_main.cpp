// limbnet command-line front end: split / train / evaluate / predict /
// bench / convert. Exit codes: 0 success, 1 runtime failure, 2 usage or
// validation error.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "limbnet/dataset.hpp"
#include "limbnet/experiment.hpp"
#include "limbnet/pipeline.hpp"
#include "limbnet/train.hpp"
#include "limbnet/weights_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace limbnet;

namespace {

struct usage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

LabelMap parse_label_map(const std::string& csv) {
    LabelMap lm;
    lm.classes.clear();
    std::stringstream ss(csv);
    std::string name;
    while (std::getline(ss, name, ',')) lm.classes.push_back(activity_from_string(name));
    lm.validate();
    return lm;
}

json label_map_json(const LabelMap& lm) {
    json j = json::array();
    for (std::size_t i = 0; i < lm.classes.size(); ++i)
        j.push_back({{"index", i}, {"activity", to_string(lm.classes[i])}});
    return j;
}

json split_json(const SplitPlan& plan) {
    auto ids = [](const std::set<std::string>& s) {
        return json(std::vector<std::string>(s.begin(), s.end()));
    };
    return {{"train", ids(plan.train_subjects)},
            {"val", ids(plan.val_subjects)},
            {"test", ids(plan.test_subjects)}};
}

SplitPlan read_split(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open split file " + path);
    json j = json::parse(in);
    SplitPlan plan;
    for (const auto& s : j.at("train")) plan.train_subjects.insert(s.get<std::string>());
    for (const auto& s : j.at("val")) plan.val_subjects.insert(s.get<std::string>());
    for (const auto& s : j.at("test")) plan.test_subjects.insert(s.get<std::string>());
    return plan;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path);
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

json roc_json(const RocCurve& curve, const LabelMap& lm) {
    json points = json::array();
    for (const auto& p : curve.points) points.push_back({p.fpr, p.tpr});
    json thresholds = json::array();
    for (double t : curve.thresholds)
        thresholds.push_back(std::isfinite(t) ? json(t) : json(nullptr));
    return {{"class_index", curve.class_index},
            {"activity", to_string(lm.activity_of(curve.class_index))},
            {"auc", curve.auc},
            {"points", points},
            {"thresholds", thresholds}};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"limbnet: lower-limb activity classification from 4-channel sEMG"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value config file with [subcommand] sections");

    std::uint64_t seed = 1;
    std::string out_dir = ".";
    app.add_option("--seed", seed, "base RNG seed")->capture_default_str();
    app.add_option("--out-dir", out_dir, "directory for output artifacts")
        ->capture_default_str();

    // ---- split ----------------------------------------------------------
    auto* sp = app.add_subcommand("split", "build a leave-one-subject-out split plan");
    sp->fallthrough();
    std::string sp_manifest, sp_vh, sp_va, sp_th, sp_ta, sp_out;
    sp->add_option("--manifest", sp_manifest, "dataset manifest CSV")->required();
    sp->add_option("--val-healthy", sp_vh, "healthy subject held out for validation")
        ->required();
    sp->add_option("--val-abnormal", sp_va, "abnormal subject held out for validation")
        ->required();
    sp->add_option("--test-healthy", sp_th, "healthy subject held out for test")->required();
    sp->add_option("--test-abnormal", sp_ta, "abnormal subject held out for test")
        ->required();
    sp->add_option("--out", sp_out, "split file path (default <out-dir>/split.json)");

    // ---- train ----------------------------------------------------------
    auto* tr = app.add_subcommand("train", "train a model and write weights + report");
    tr->fallthrough();
    std::string tr_manifest, tr_split, tr_label_map;
    std::size_t tr_epochs = 50, tr_batch = 32, tr_stride = 192, tr_window = 256;
    std::size_t tr_latency_iters = 200;
    bool tr_denoise = false, tr_strict = false, tr_no_latency = false;
    double tr_lr = 1e-3;
    tr->add_option("--manifest", tr_manifest, "dataset manifest CSV")->required();
    tr->add_option("--split", tr_split, "split plan JSON from `limbnet split`")->required();
    tr->add_option("--epochs", tr_epochs, "training epochs")->capture_default_str();
    tr->add_option("--batch-size", tr_batch, "mini-batch size")->capture_default_str();
    tr->add_flag("--denoise", tr_denoise, "wavelet-denoise signals before windowing");
    tr->add_option("--stride", tr_stride, "window stride in samples")->capture_default_str();
    tr->add_option("--window", tr_window, "window length in samples")->capture_default_str();
    tr->add_option("--lr", tr_lr, "Adam learning rate")->capture_default_str();
    tr->add_option("--label-map", tr_label_map,
                   "comma-separated activities for classes 0,1,2");
    tr->add_option("--latency-iters", tr_latency_iters, "latency benchmark iterations")
        ->capture_default_str();
    tr->add_flag("--no-latency", tr_no_latency, "skip the latency benchmark");
    tr->add_flag("--strict", tr_strict, "require a complete 22-subject x 3-activity set");

    // ---- evaluate -------------------------------------------------------
    auto* ev = app.add_subcommand("evaluate", "evaluate saved weights on one partition");
    ev->fallthrough();
    std::string ev_weights, ev_manifest, ev_split, ev_partition, ev_out, ev_label_map;
    std::size_t ev_stride = 192;
    bool ev_denoise = false;
    ev->add_option("--weights", ev_weights, "weight file")->required();
    ev->add_option("--manifest", ev_manifest, "dataset manifest CSV")->required();
    ev->add_option("--split", ev_split, "split plan JSON")->required();
    ev->add_option("--partition", ev_partition, "train | val | test")
        ->required()
        ->check(CLI::IsMember({"train", "val", "test"}));
    ev->add_option("--stride", ev_stride, "window stride in samples")->capture_default_str();
    ev->add_flag("--denoise", ev_denoise, "wavelet-denoise signals before windowing");
    ev->add_option("--label-map", ev_label_map,
                   "comma-separated activities for classes 0,1,2");
    ev->add_option("--out", ev_out, "also write the report JSON here");

    // ---- predict --------------------------------------------------------
    auto* pr = app.add_subcommand("predict", "classify each window of a recording CSV");
    pr->fallthrough();
    std::string pr_weights, pr_input, pr_label_map;
    std::size_t pr_stride = 192;
    pr->add_option("--weights", pr_weights, "weight file")->required();
    pr->add_option("--input", pr_input, "canonical recording CSV")->required();
    pr->add_option("--stride", pr_stride, "window stride in samples")->capture_default_str();
    pr->add_option("--label-map", pr_label_map,
                   "comma-separated activities for classes 0,1,2");

    // ---- bench ----------------------------------------------------------
    auto* be = app.add_subcommand("bench", "per-window inference latency benchmark");
    be->fallthrough();
    std::string be_weights;
    std::size_t be_iters = 1000, be_warmup = 50;
    be->add_option("--weights", be_weights, "weight file")->required();
    be->add_option("--iters", be_iters, "timed iterations")->capture_default_str();
    be->add_option("--warmup", be_warmup, "untimed warmup iterations")
        ->capture_default_str();

    // ---- convert --------------------------------------------------------
    auto* cv = app.add_subcommand("convert",
                                  "map a vendor CSV export onto the canonical column set");
    cv->fallthrough();
    std::string cv_in, cv_out;
    std::string cv_vm = "vm", cv_st = "st", cv_bf = "bf", cv_rf = "rf";
    std::string cv_time = "time", cv_angle = "angle";
    cv->add_option("--input", cv_in, "source CSV")->required();
    cv->add_option("--output", cv_out, "canonical CSV to write")->required();
    cv->add_option("--vm-col", cv_vm, "source column holding VM")->capture_default_str();
    cv->add_option("--st-col", cv_st, "source column holding ST")->capture_default_str();
    cv->add_option("--bf-col", cv_bf, "source column holding BF")->capture_default_str();
    cv->add_option("--rf-col", cv_rf, "source column holding RF")->capture_default_str();
    cv->add_option("--time-col", cv_time, "source column holding time")
        ->capture_default_str();
    cv->add_option("--angle-col", cv_angle, "source column holding knee angle")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        fs::create_directories(out_dir);

        if (app.got_subcommand(sp)) {
            const Dataset ds = load_dataset(sp_manifest);
            const SplitPlan plan = make_split(ds, {sp_vh, sp_va}, {sp_th, sp_ta});
            const std::string path =
                sp_out.empty() ? (fs::path(out_dir) / "split.json").string() : sp_out;
            write_text(path, split_json(plan).dump(2) + "\n");
            std::cout << "split written to " << path << " (train="
                      << plan.train_subjects.size() << " val=" << plan.val_subjects.size()
                      << " test=" << plan.test_subjects.size() << ")\n";
            return 0;
        }

        if (app.got_subcommand(tr)) {
            const LabelMap lm =
                tr_label_map.empty() ? LabelMap{} : parse_label_map(tr_label_map);
            const Dataset ds = load_dataset(tr_manifest, tr_strict, lm);
            const SplitPlan plan = read_split(tr_split);

            ExperimentConfig cfg;
            cfg.model.window_len = tr_window;
            cfg.model.seed = seed;
            cfg.train.epochs = tr_epochs;
            cfg.train.batch_size = tr_batch;
            cfg.train.adam.lr = tr_lr;
            cfg.train.seed = seed;
            cfg.train.denoise.enabled = tr_denoise;
            cfg.stride = tr_stride;
            cfg.run_latency = !tr_no_latency;
            cfg.latency_iters = tr_latency_iters;

            const ExperimentReport report = run_experiment(ds, plan, cfg, &std::cout);

            const std::string wpath = (fs::path(out_dir) / "weights.bin").string();
            const std::string rpath = (fs::path(out_dir) / "report.json").string();
            save_weights(report.weights, wpath);
            write_text(rpath, report_to_json(report));

            std::cout << std::fixed << std::setprecision(2)
                      << "test accuracy " << report.test_metrics.accuracy_pct
                      << "%  balanced " << report.test_metrics.balanced_accuracy_pct
                      << "%\nweights written to " << wpath << "\nreport written to "
                      << rpath << "\n";
            return 0;
        }

        if (app.got_subcommand(ev)) {
            const LabelMap lm =
                ev_label_map.empty() ? LabelMap{} : parse_label_map(ev_label_map);
            const ModelWeights weights = load_weights(ev_weights);
            const Dataset ds = load_dataset(ev_manifest, false, lm);
            const SplitPlan plan = read_split(ev_split);

            const std::set<std::string>& subjects =
                ev_partition == "train" ? plan.train_subjects
                : ev_partition == "val" ? plan.val_subjects
                                        : plan.test_subjects;
            PipelineConfig pipe;
            pipe.window_len = weights.config.window_len;
            pipe.stride = ev_stride;
            pipe.denoise.enabled = ev_denoise;
            const std::vector<WindowFrame> frames = extract_frames(ds, subjects, pipe);
            if (frames.empty())
                throw usage_error("partition '" + ev_partition + "' produced no windows");

            const EvalResult res = evaluate(weights, frames);
            MetricsReport metrics = metrics_from_confusion(res.confusion);
            json roc = json::array();
            metrics.auc.resize(weights.config.n_classes);
            for (std::size_t c = 0; c < weights.config.n_classes; ++c) {
                RocCurve curve = roc_auc(res.probs, res.labels, static_cast<int>(c));
                metrics.auc[c] = curve.auc;
                roc.push_back(roc_json(curve, lm));
            }

            json j = {{"report_version", 1},
                      {"partition", ev_partition},
                      {"label_map", label_map_json(lm)},
                      {"n_frames", frames.size()},
                      {"confusion", confusion_json(res.confusion)},
                      {"metrics", metrics_json(metrics)},
                      {"roc", roc}};
            const std::string text = j.dump(2) + "\n";
            std::cout << text;
            if (!ev_out.empty()) write_text(ev_out, text);
            return 0;
        }

        if (app.got_subcommand(pr)) {
            const LabelMap lm =
                pr_label_map.empty() ? LabelMap{} : parse_label_map(pr_label_map);
            const ModelWeights weights = load_weights(pr_weights);
            Recording rec = load_recording(pr_input);
            rec.activity = lm.classes.front();  // placeholder; labels unused here

            bool too_short = false;
            const std::vector<WindowFrame> frames =
                slide_windows(rec, lm, weights.config.window_len, pr_stride, &too_short);
            if (too_short)
                throw usage_error("recording shorter than one window (" +
                                  std::to_string(rec.n_samples()) + " < " +
                                  std::to_string(weights.config.window_len) + " samples)");

            std::cout << "offset,class,activity";
            for (std::size_t c = 0; c < weights.config.n_classes; ++c) std::cout << ",p" << c;
            std::cout << "\n" << std::fixed << std::setprecision(4);
            for (const auto& f : frames) {
                const ForwardResult r = forward(weights, f.data, RunMode::eval, nullptr);
                std::cout << f.source_offset << "," << r.probs.predicted_class << ","
                          << to_string(lm.activity_of(
                                 static_cast<int>(r.probs.predicted_class)));
                for (double p : r.probs.probabilities) std::cout << "," << p;
                std::cout << "\n";
            }
            return 0;
        }

        if (app.got_subcommand(be)) {
            if (be_iters == 0) throw usage_error("--iters must be >= 1");
            const ModelWeights weights = load_weights(be_weights);
            Rng rng(seed);
            const LatencyStats stats = latency_benchmark(weights, be_iters, be_warmup, rng);
            std::cout << std::fixed << std::setprecision(6)
                      << "mean_ms=" << stats.mean_ms << "\n"
                      << "p50_ms=" << stats.p50_ms << "\n"
                      << "p99_ms=" << stats.p99_ms << "\n"
                      << "n_iters=" << stats.n_iters << "\n"
                      << "cpu=" << stats.host.cpu << "\n"
                      << "os=" << stats.host.os << "\n";
            return 0;
        }

        if (app.got_subcommand(cv)) {
            ColumnMap map = {{"vm", cv_vm}, {"st", cv_st}, {"bf", cv_bf}, {"rf", cv_rf},
                             {"time", cv_time}, {"angle", cv_angle}};
            const Recording rec = load_recording(cv_in, map);
            write_recording(rec, cv_out);
            std::cout << "wrote " << cv_out << " (" << rec.n_samples() << " samples)\n";
            return 0;
        }
    } catch (const usage_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
