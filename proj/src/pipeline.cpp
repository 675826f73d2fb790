#include "limbnet/pipeline.hpp"

#include <algorithm>
#include <iterator>
#include <map>
#include <stdexcept>

namespace limbnet {

std::vector<WindowFrame> slide_windows(const Recording& rec, const LabelMap& label_map,
                                       std::size_t window_len, std::size_t stride,
                                       bool* too_short) {
    if (window_len == 0 || stride == 0)
        throw std::invalid_argument("slide_windows: window_len and stride must be > 0");
    if (too_short) *too_short = false;
    const std::size_t n = rec.n_samples();
    std::vector<WindowFrame> frames;
    if (n < window_len) {
        if (too_short) *too_short = true;
        return frames;
    }
    const int label = label_map.class_of(rec.activity);
    const std::size_t count = (n - window_len) / stride + 1;
    frames.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t off = k * stride;
        WindowFrame f;
        f.data = TensorF::zeros({kNumChannels, window_len});
        for (std::size_t c = 0; c < kNumChannels; ++c)
            std::copy(&rec.semg.at(c, off), &rec.semg.at(c, off) + window_len,
                      &f.data.at(c, 0));
        f.label = label;
        f.subject_id = rec.meta.subject_id;
        f.source_offset = off;
        frames.push_back(std::move(f));
    }
    return frames;
}

SplitPlan make_split(const Dataset& dataset, const SubjectPair& val_pair,
                     const SubjectPair& test_pair) {
    // Cohort per subject, from the recordings.
    std::map<std::string, Cohort> cohorts;
    for (const auto& r : dataset.recordings) cohorts[r.meta.subject_id] = r.meta.cohort;

    auto check = [&](const std::string& id, Cohort expect, const char* role) {
        auto it = cohorts.find(id);
        if (it == cohorts.end())
            throw std::invalid_argument(std::string(role) + " subject '" + id +
                                        "' not in dataset");
        if (it->second != expect)
            throw std::invalid_argument(std::string(role) + " subject '" + id + "' is " +
                                        to_string(it->second) + ", expected " +
                                        to_string(expect));
    };
    check(val_pair.healthy_id, Cohort::healthy, "validation");
    check(val_pair.abnormal_id, Cohort::abnormal, "validation");
    check(test_pair.healthy_id, Cohort::healthy, "test");
    check(test_pair.abnormal_id, Cohort::abnormal, "test");

    const std::set<std::string> held = {val_pair.healthy_id, val_pair.abnormal_id,
                                        test_pair.healthy_id, test_pair.abnormal_id};
    if (held.size() != 4) {
        for (const auto& id : {test_pair.healthy_id, test_pair.abnormal_id})
            if (id == val_pair.healthy_id || id == val_pair.abnormal_id)
                throw std::invalid_argument("subject '" + id +
                                            "' appears in both validation and test pairs");
        throw std::invalid_argument("validation/test pairs must name 4 distinct subjects");
    }

    SplitPlan plan;
    plan.val_subjects = {val_pair.healthy_id, val_pair.abnormal_id};
    plan.test_subjects = {test_pair.healthy_id, test_pair.abnormal_id};
    for (const auto& [id, _] : cohorts)
        if (!held.count(id)) plan.train_subjects.insert(id);
    return plan;
}

void shuffle_frames(std::vector<WindowFrame>& frames, Rng& rng) {
    rng.shuffle(frames);
}

std::vector<WindowFrame> extract_frames(const Dataset& dataset,
                                        const std::set<std::string>& subjects,
                                        const PipelineConfig& config,
                                        std::size_t* skipped_recordings) {
    if (skipped_recordings) *skipped_recordings = 0;
    std::vector<WindowFrame> frames;
    for (const auto& rec : dataset.recordings) {
        if (!subjects.count(rec.meta.subject_id)) continue;
        bool too_short = false;
        std::vector<WindowFrame> fs;
        if (config.denoise.enabled) {
            Recording denoised = rec;
            for (std::size_t c = 0; c < kNumChannels; ++c) {
                std::vector<double> chan(&rec.semg.at(c, 0),
                                         &rec.semg.at(c, 0) + rec.n_samples());
                std::vector<double> clean = wavelet_denoise(chan, config.denoise);
                std::copy(clean.begin(), clean.end(), &denoised.semg.at(c, 0));
            }
            fs = slide_windows(denoised, dataset.label_map, config.window_len, config.stride,
                               &too_short);
        } else {
            fs = slide_windows(rec, dataset.label_map, config.window_len, config.stride,
                               &too_short);
        }
        if (too_short && skipped_recordings) ++*skipped_recordings;
        frames.insert(frames.end(), std::make_move_iterator(fs.begin()),
                      std::make_move_iterator(fs.end()));
    }
    return frames;
}

}  // namespace limbnet
