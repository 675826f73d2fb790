#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "limbnet/dataset.hpp"
#include "limbnet/rng.hpp"
#include "limbnet/tensor.hpp"
#include "limbnet/wavelet.hpp"

namespace limbnet {

struct WindowFrame {
    TensorF data;              // 4 x window_len
    int label = 0;             // class index
    std::string subject_id;
    std::size_t source_offset = 0;  // sample index of window start
};

// Window extraction. Windows start at k*stride while they fit; a
// recording shorter than the window yields no frames and sets
// *too_short (not an error, partial datasets stay usable).
std::vector<WindowFrame> slide_windows(const Recording& rec, const LabelMap& label_map,
                                       std::size_t window_len = 256, std::size_t stride = 192,
                                       bool* too_short = nullptr);

struct SplitPlan {
    std::set<std::string> train_subjects;
    std::set<std::string> val_subjects;
    std::set<std::string> test_subjects;

    bool contains(const std::string& id) const {
        return train_subjects.count(id) || val_subjects.count(id) || test_subjects.count(id);
    }
};

struct SubjectPair {
    std::string healthy_id;
    std::string abnormal_id;
};

// Leave-one-subject-out split: one healthy + one abnormal subject each
// for validation and test, everyone else trains. Validates existence,
// distinctness, and claimed cohorts.
SplitPlan make_split(const Dataset& dataset, const SubjectPair& val_pair,
                     const SubjectPair& test_pair);

// Seeded Fisher-Yates permutation; the frame multiset is preserved.
void shuffle_frames(std::vector<WindowFrame>& frames, Rng& rng);

// Full frame pipeline for one partition: optional per-channel wavelet
// denoising of whole recordings, then windowing. Denoising disabled
// leaves samples bit-identical to the raw recording.
struct PipelineConfig {
    std::size_t window_len = 256;
    std::size_t stride = 192;
    DenoiseConfig denoise;
};

std::vector<WindowFrame> extract_frames(const Dataset& dataset,
                                        const std::set<std::string>& subjects,
                                        const PipelineConfig& config,
                                        std::size_t* skipped_recordings = nullptr);

}  // namespace limbnet
