#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "limbnet/rng.hpp"
#include "limbnet/tensor.hpp"

namespace limbnet {

// Parse failures carry the file and 1-based line number.
class parse_error : public std::runtime_error {
public:
    parse_error(const std::string& file, std::size_t line, const std::string& msg)
        : std::runtime_error(file + ":" + std::to_string(line) + ": " + msg),
          line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

enum class Cohort { healthy, abnormal };
enum class Abnormality { none, acl, meniscus, sciatic };
enum class Activity { gait, standing_knee_flexion, sitting_knee_extension };

std::string to_string(Cohort c);
std::string to_string(Abnormality a);
std::string to_string(Activity a);
Cohort cohort_from_string(const std::string& s);
Abnormality abnormality_from_string(const std::string& s);
Activity activity_from_string(const std::string& s);

constexpr std::size_t kNumChannels = 4;   // VM, ST, BF, RF
constexpr double kSampleRateHz = 1000.0;

struct SubjectMeta {
    std::string subject_id;
    Cohort cohort = Cohort::healthy;
    Abnormality abnormality = Abnormality::none;  // none whenever cohort == healthy
};

struct Recording {
    SubjectMeta meta;
    Activity activity = Activity::gait;
    double sample_rate = kSampleRateHz;
    TensorF semg;                              // 4 x N, rows ordered VM, ST, BF, RF
    std::optional<std::vector<double>> knee_angle;  // degrees, length N

    std::size_t n_samples() const { return semg.rank() == 2 ? semg.dim(1) : 0; }
};

// Maps each Activity onto a class index {0,1,2}; must be a bijection.
struct LabelMap {
    // index -> activity; default follows: 0 = standing_knee_flexion,
    // 1 = sitting_knee_extension, 2 = gait.
    std::vector<Activity> classes = {Activity::standing_knee_flexion,
                                     Activity::sitting_knee_extension, Activity::gait};

    int class_of(Activity a) const;
    Activity activity_of(int cls) const { return classes.at(static_cast<std::size_t>(cls)); }
    void validate() const;
};

struct Dataset {
    std::vector<Recording> recordings;
    LabelMap label_map;

    std::vector<std::string> subject_ids() const;  // unique, sorted
};

// ======================================================================
// Canonical CSV
//
// UTF-8, comma separated, header row; columns named (case-insensitive)
// time, vm, st, bf, rf, angle — time and angle optional. The time
// column, when present, must advance in 1 ms steps.
// ======================================================================

// Maps the canonical channel keys {"vm","st","bf","rf"} (plus optional
// "angle") onto the header names used in the file. Missing keys default
// to the canonical names.
using ColumnMap = std::map<std::string, std::string>;

Recording load_recording(const std::string& path, const ColumnMap& column_map = {});
void write_recording(const Recording& rec, const std::string& path, bool with_time = true);

// Derives subject/cohort/activity from a "<subject>_<cohort>_<activity>"
// file stem; anything unparsable falls back to subject = stem.
SubjectMeta meta_from_filename(const std::string& path, Activity* activity_out);

// ======================================================================
// Manifest: CSV with header file,subject_id,cohort,abnormality,activity.
// File paths are relative to the manifest's directory.
// ======================================================================

Dataset load_dataset(const std::string& manifest_path, bool strict = false,
                     const LabelMap& label_map = {});
void write_manifest(const Dataset& ds, const std::vector<std::string>& files,
                    const std::string& manifest_path);

// ======================================================================
// Synthetic data: per class, each channel carries a band-limited
// sinusoidal signature (distinct frequency and amplitude per class)
// plus seeded Gaussian noise and a per-subject gain.
// ======================================================================

struct ClassSignatureParams {
    std::vector<double> class_freq_hz = {25.0, 50.0, 125.0};   // per class
    std::vector<double> class_amp = {0.5, 1.0, 2.0};           // per class
    std::vector<double> channel_scale = {1.0, 0.8, 1.2, 0.9};  // per channel
    double noise_amp = 0.05;
    double subject_gain_lo = 0.9;
    double subject_gain_hi = 1.1;
};

Dataset generate_synthetic_dataset(std::size_t n_subjects, std::size_t samples_per_recording,
                                   const ClassSignatureParams& params, Rng& rng,
                                   const LabelMap& label_map = {});

// Writes one canonical CSV per recording plus manifest.csv into out_dir;
// returns the manifest path.
std::string write_synthetic_dataset(const Dataset& ds, const std::string& out_dir);

}  // namespace limbnet
