#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "limbnet/dataset.hpp"

using namespace limbnet;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::path("ds_tmp") / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::trunc);
    f << text;
}

std::string read_text(const std::string& path) {
    std::ifstream f(path);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace

// ======================================================================
// Canonical CSV
// ======================================================================

TEST_CASE("csv: loads a minimal file with channels in canonical order") {
    TempDir dir("csv_minimal");
    const std::string path = dir.file("S01_healthy_gait.csv");
    write_text(path,
               "vm,st,bf,rf\n"
               "1,2,3,4\n"
               "5,6,7,8\n"
               "9,10,11,12\n");
    Recording rec = load_recording(path);
    CHECK(rec.n_samples() == 3);
    CHECK(rec.semg.at(0, 0) == 1.0);  // vm
    CHECK(rec.semg.at(1, 1) == 6.0);  // st
    CHECK(rec.semg.at(2, 2) == 11.0);  // bf
    CHECK(rec.semg.at(3, 0) == 4.0);  // rf
    CHECK_FALSE(rec.knee_angle.has_value());
    CHECK(rec.meta.subject_id == "S01");
    CHECK(rec.meta.cohort == Cohort::healthy);
    CHECK(rec.activity == Activity::gait);
}

TEST_CASE("csv: header matching is case-insensitive and order-free") {
    TempDir dir("csv_case");
    const std::string path = dir.file("rec.csv");
    write_text(path,
               "RF,Bf,ST,vm\n"
               "4,3,2,1\n");
    Recording rec = load_recording(path);
    CHECK(rec.semg.at(0, 0) == 1.0);
    CHECK(rec.semg.at(1, 0) == 2.0);
    CHECK(rec.semg.at(2, 0) == 3.0);
    CHECK(rec.semg.at(3, 0) == 4.0);
}

TEST_CASE("csv: a missing channel column is reported by name") {
    TempDir dir("csv_missing");
    const std::string path = dir.file("rec.csv");
    write_text(path, "vm,st,bf\n1,2,3\n");
    try {
        (void)load_recording(path);
        FAIL("expected parse_error");
    } catch (const parse_error& e) {
        CHECK(e.line() == 1);
        CHECK(std::string(e.what()).find("rf") != std::string::npos);
    }
}

TEST_CASE("csv: parse failures carry 1-based line numbers") {
    TempDir dir("csv_bad");
    const std::string path = dir.file("rec.csv");

    write_text(path, "vm,st,bf,rf\n1,2,3,4\n1,oops,3,4\n");
    try {
        (void)load_recording(path);
        FAIL("expected parse_error");
    } catch (const parse_error& e) {
        CHECK(e.line() == 3);
        CHECK(std::string(e.what()).find("oops") != std::string::npos);
        CHECK(std::string(e.what()).find("st") != std::string::npos);
    }

    write_text(path, "vm,st,bf,rf\n1,2,3,4\n1,2,3\n");
    try {
        (void)load_recording(path);
        FAIL("expected parse_error");
    } catch (const parse_error& e) {
        CHECK(e.line() == 3);
    }

    write_text(path, "vm,st,bf,rf\n");
    CHECK_THROWS_AS((void)load_recording(path), parse_error);
}

TEST_CASE("csv: the time column must advance in 1 ms steps") {
    TempDir dir("csv_time");
    const std::string path = dir.file("rec.csv");
    write_text(path,
               "time,vm,st,bf,rf\n"
               "0.000,1,1,1,1\n"
               "0.001,1,1,1,1\n"
               "0.003,1,1,1,1\n");  // skipped a sample
    try {
        (void)load_recording(path);
        FAIL("expected parse_error");
    } catch (const parse_error& e) {
        CHECK(e.line() == 4);
    }
}

TEST_CASE("csv: column map renames headers without changing channel order") {
    TempDir dir("csv_map");
    const std::string path = dir.file("rec.csv");
    write_text(path,
               "EMG_RF,EMG_VM,EMG_BF,EMG_ST\n"
               "40,10,30,20\n");
    ColumnMap map = {{"vm", "EMG_VM"}, {"st", "EMG_ST"}, {"bf", "EMG_BF"}, {"rf", "EMG_RF"}};
    Recording rec = load_recording(path, map);
    CHECK(rec.semg.at(0, 0) == 10.0);
    CHECK(rec.semg.at(1, 0) == 20.0);
    CHECK(rec.semg.at(2, 0) == 30.0);
    CHECK(rec.semg.at(3, 0) == 40.0);

    // The error for a missing mapped column names the mapped header.
    ColumnMap bad = map;
    bad["rf"] = "EMG_NOPE";
    try {
        (void)load_recording(path, bad);
        FAIL("expected parse_error");
    } catch (const parse_error& e) {
        CHECK(std::string(e.what()).find("emg_nope") != std::string::npos);
    }
}

TEST_CASE("csv: write then load round-trips samples, angle, and metadata") {
    TempDir dir("csv_roundtrip");
    Recording rec;
    rec.meta = {"S05", Cohort::abnormal, Abnormality::meniscus};
    rec.activity = Activity::sitting_knee_extension;
    rec.semg = TensorF::zeros({kNumChannels, 7});
    for (std::size_t c = 0; c < kNumChannels; ++c)
        for (std::size_t t = 0; t < 7; ++t)
            rec.semg.at(c, t) = std::sin(0.37 * static_cast<double>(c * 7 + t)) * 1e-3;
    rec.knee_angle = std::vector<double>{10.5, 11, 12, 13, 14, 15.25, 16};

    const std::string path = dir.file("S05_abnormal_sitting_knee_extension.csv");
    write_recording(rec, path);
    Recording back = load_recording(path);

    REQUIRE(back.n_samples() == 7);
    for (std::size_t c = 0; c < kNumChannels; ++c)
        for (std::size_t t = 0; t < 7; ++t)
            CHECK(back.semg.at(c, t) == doctest::Approx(rec.semg.at(c, t)).epsilon(1e-12));
    REQUIRE(back.knee_angle.has_value());
    for (std::size_t t = 0; t < 7; ++t)
        CHECK((*back.knee_angle)[t] == doctest::Approx((*rec.knee_angle)[t]).epsilon(1e-12));
    CHECK(back.meta.subject_id == "S05");
    CHECK(back.meta.cohort == Cohort::abnormal);
    CHECK(back.activity == Activity::sitting_knee_extension);

    // with_time=false drops the time column and still loads.
    const std::string no_time = dir.file("S05_abnormal_gait.csv");
    write_recording(rec, no_time, false);
    CHECK(read_text(no_time).find("time") == std::string::npos);
    CHECK(load_recording(no_time).n_samples() == 7);
}

// ======================================================================
// Filename convention
// ======================================================================

TEST_CASE("filenames: <subject>_<cohort>_<activity> parses, anything else falls back") {
    Activity act = Activity::gait;
    SubjectMeta m = meta_from_filename("data/S01_healthy_gait.csv", &act);
    CHECK(m.subject_id == "S01");
    CHECK(m.cohort == Cohort::healthy);
    CHECK(act == Activity::gait);

    m = meta_from_filename("A07_abnormal_standing_knee_flexion.csv", &act);
    CHECK(m.subject_id == "A07");
    CHECK(m.cohort == Cohort::abnormal);
    CHECK(act == Activity::standing_knee_flexion);

    // Subjects may contain underscores; the cohort token splits the stem.
    m = meta_from_filename("sub_01_healthy_sitting_knee_extension.csv", &act);
    CHECK(m.subject_id == "sub_01");
    CHECK(m.cohort == Cohort::healthy);
    CHECK(act == Activity::sitting_knee_extension);

    // No cohort token: subject = stem, activity defaults to gait.
    m = meta_from_filename("trial42.csv", &act);
    CHECK(m.subject_id == "trial42");
    CHECK(m.cohort == Cohort::healthy);
    CHECK(act == Activity::gait);
}

// ======================================================================
// Label map
// ======================================================================

TEST_CASE("label map: default order and bijection checks") {
    LabelMap lm;
    lm.validate();
    CHECK(lm.class_of(Activity::standing_knee_flexion) == 0);
    CHECK(lm.class_of(Activity::sitting_knee_extension) == 1);
    CHECK(lm.class_of(Activity::gait) == 2);
    CHECK(lm.activity_of(2) == Activity::gait);

    LabelMap custom;
    custom.classes = {Activity::gait, Activity::standing_knee_flexion,
                      Activity::sitting_knee_extension};
    custom.validate();
    CHECK(custom.class_of(Activity::gait) == 0);

    LabelMap dup;
    dup.classes = {Activity::gait, Activity::gait, Activity::standing_knee_flexion};
    CHECK_THROWS_AS(dup.validate(), std::invalid_argument);
    CHECK_THROWS_AS((void)dup.class_of(Activity::sitting_knee_extension), std::invalid_argument);

    LabelMap two;
    two.classes = {Activity::gait, Activity::standing_knee_flexion};
    CHECK_THROWS_AS(two.validate(), std::invalid_argument);
}

// ======================================================================
// Manifest
// ======================================================================

namespace {

// One-line recording CSV shared by the manifest tests.
void write_tiny_recording(const std::string& path) {
    write_text(path, "vm,st,bf,rf\n0.1,0.2,0.3,0.4\n0.5,0.6,0.7,0.8\n");
}

}  // namespace

TEST_CASE("manifest: rows resolve relative paths and override filename metadata") {
    TempDir dir("manifest_ok");
    write_tiny_recording(dir.file("a.csv"));
    write_tiny_recording(dir.file("b.csv"));
    write_text(dir.file("manifest.csv"),
               "file,subject_id,cohort,abnormality,activity\n"
               "a.csv,S01,healthy,none,gait\n"
               "b.csv,S01,healthy,none,standing_knee_flexion\n");
    Dataset ds = load_dataset(dir.file("manifest.csv"));
    REQUIRE(ds.recordings.size() == 2);
    CHECK(ds.recordings[0].meta.subject_id == "S01");
    CHECK(ds.recordings[0].activity == Activity::gait);
    CHECK(ds.recordings[1].activity == Activity::standing_knee_flexion);
    CHECK(ds.recordings[1].n_samples() == 2);
    CHECK(ds.subject_ids() == std::vector<std::string>{"S01"});
}

TEST_CASE("manifest: malformed rows are rejected with line numbers") {
    TempDir dir("manifest_bad");
    write_tiny_recording(dir.file("a.csv"));

    // Unknown activity.
    write_text(dir.file("m1.csv"),
               "file,subject_id,cohort,abnormality,activity\n"
               "a.csv,S01,healthy,none,jumping\n");
    try {
        (void)load_dataset(dir.file("m1.csv"));
        FAIL("expected parse_error");
    } catch (const parse_error& e) {
        CHECK(e.line() == 2);
        CHECK(std::string(e.what()).find("jumping") != std::string::npos);
    }

    // Healthy subject with an abnormality listed.
    write_text(dir.file("m2.csv"),
               "file,subject_id,cohort,abnormality,activity\n"
               "a.csv,S01,healthy,acl,gait\n");
    CHECK_THROWS_AS((void)load_dataset(dir.file("m2.csv")), parse_error);

    // Duplicate (subject, activity).
    write_text(dir.file("m3.csv"),
               "file,subject_id,cohort,abnormality,activity\n"
               "a.csv,S01,healthy,none,gait\n"
               "a.csv,S01,healthy,none,gait\n");
    try {
        (void)load_dataset(dir.file("m3.csv"));
        FAIL("expected parse_error");
    } catch (const parse_error& e) {
        CHECK(e.line() == 3);
        CHECK(std::string(e.what()).find("duplicate") != std::string::npos);
    }

    // Missing manifest column.
    write_text(dir.file("m4.csv"), "file,subject_id,cohort,activity\na.csv,S01,healthy,gait\n");
    CHECK_THROWS_AS((void)load_dataset(dir.file("m4.csv")), parse_error);
}

TEST_CASE("manifest: strict mode wants 22 subjects x 3 activities") {
    TempDir dir("manifest_strict");
    Rng rng(5);
    Dataset ds = generate_synthetic_dataset(22, 32, ClassSignatureParams{}, rng);
    const std::string manifest = write_synthetic_dataset(ds, dir.path.string());

    Dataset strict = load_dataset(manifest, true);
    CHECK(strict.recordings.size() == 66);
    CHECK(strict.subject_ids().size() == 22);

    // Dropping one row breaks completeness.
    std::string text = read_text(manifest);
    const std::size_t cut = text.rfind('\n', text.size() - 2);
    write_text(manifest, text.substr(0, cut + 1));
    CHECK_THROWS_WITH_AS((void)load_dataset(manifest, true),
                         doctest::Contains("missing activity"), std::runtime_error);

    // Non-strict load of the same truncated manifest is fine.
    CHECK(load_dataset(manifest, false).recordings.size() == 65);
}

// ======================================================================
// Synthetic generator
// ======================================================================

TEST_CASE("synthetic: same seed reproduces the dataset, different seed diverges") {
    ClassSignatureParams params;
    Rng a(42), b(42), c(43);
    Dataset da = generate_synthetic_dataset(4, 128, params, a);
    Dataset db = generate_synthetic_dataset(4, 128, params, b);
    Dataset dc = generate_synthetic_dataset(4, 128, params, c);
    REQUIRE(da.recordings.size() == 12);
    CHECK(da.recordings[3].semg.data == db.recordings[3].semg.data);
    CHECK(da.recordings[3].semg.data != dc.recordings[3].semg.data);
}

TEST_CASE("synthetic: ids split healthy-first and cycle abnormality kinds") {
    Rng rng(7);
    Dataset ds = generate_synthetic_dataset(5, 16, ClassSignatureParams{}, rng);
    CHECK(ds.subject_ids() == std::vector<std::string>{"A01", "A02", "H01", "H02", "H03"});
    for (const auto& rec : ds.recordings) {
        const bool healthy = rec.meta.subject_id[0] == 'H';
        CHECK(rec.meta.cohort == (healthy ? Cohort::healthy : Cohort::abnormal));
        CHECK((rec.meta.abnormality == Abnormality::none) == healthy);
    }
}

TEST_CASE("synthetic: with noise off each class signal is exactly periodic") {
    ClassSignatureParams params;
    params.noise_amp = 0.0;
    Rng rng(11);
    Dataset ds = generate_synthetic_dataset(3, 400, params, rng);
    // Default frequencies 25/50/125 Hz at 1 kHz: periods 40/20/8 samples.
    const std::size_t period_of[3] = {40, 20, 8};
    for (const auto& rec : ds.recordings) {
        const int cls = ds.label_map.class_of(rec.activity);
        const std::size_t p = period_of[cls];
        for (std::size_t c = 0; c < kNumChannels; ++c)
            for (std::size_t t = 0; t + p < rec.n_samples(); ++t)
                CHECK(rec.semg.at(c, t + p) == doctest::Approx(rec.semg.at(c, t)).epsilon(1e-9));
    }
}

TEST_CASE("synthetic: classes separate by signal energy") {
    Rng rng(19);
    Dataset ds = generate_synthetic_dataset(8, 512, ClassSignatureParams{}, rng);

    auto mean_square = [](const Recording& r) {
        double s = 0.0;
        for (double v : r.semg.data) s += v * v;
        return s / static_cast<double>(r.semg.numel());
    };

    // Nearest-centroid on mean-square energy must recover the labels:
    // the class amplitudes (0.5 / 1 / 2) dominate the ±10% subject gain.
    double centroid[3] = {0, 0, 0};
    std::size_t count[3] = {0, 0, 0};
    for (const auto& rec : ds.recordings) {
        const int cls = ds.label_map.class_of(rec.activity);
        centroid[cls] += mean_square(rec);
        ++count[cls];
    }
    for (int c = 0; c < 3; ++c) centroid[c] /= static_cast<double>(count[c]);

    std::size_t correct = 0;
    for (const auto& rec : ds.recordings) {
        const double ms = mean_square(rec);
        int best = 0;
        for (int c = 1; c < 3; ++c)
            if (std::fabs(ms - centroid[c]) < std::fabs(ms - centroid[best])) best = c;
        correct += best == ds.label_map.class_of(rec.activity);
    }
    CHECK(static_cast<double>(correct) / static_cast<double>(ds.recordings.size()) > 0.9);
}

TEST_CASE("synthetic: invalid parameters are rejected") {
    Rng rng(1);
    CHECK_THROWS_AS((void)generate_synthetic_dataset(2, 64, ClassSignatureParams{}, rng),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)generate_synthetic_dataset(4, 0, ClassSignatureParams{}, rng),
                    std::invalid_argument);
    ClassSignatureParams bad;
    bad.class_freq_hz = {25.0, 50.0};
    CHECK_THROWS_AS((void)generate_synthetic_dataset(4, 64, bad, rng), std::invalid_argument);
    bad = ClassSignatureParams{};
    bad.subject_gain_lo = 1.2;  // above the hi bound
    CHECK_THROWS_AS((void)generate_synthetic_dataset(4, 64, bad, rng), std::invalid_argument);
}

TEST_CASE("synthetic: written dataset loads back identically") {
    TempDir dir("synth_io");
    Rng rng(23);
    Dataset ds = generate_synthetic_dataset(3, 64, ClassSignatureParams{}, rng);
    const std::string manifest = write_synthetic_dataset(ds, dir.path.string());
    Dataset back = load_dataset(manifest);
    REQUIRE(back.recordings.size() == ds.recordings.size());
    for (std::size_t i = 0; i < ds.recordings.size(); ++i) {
        const Recording& a = ds.recordings[i];
        // Manifest order may differ; match by subject and activity.
        const auto it = std::find_if(back.recordings.begin(), back.recordings.end(),
                                     [&](const Recording& r) {
                                         return r.meta.subject_id == a.meta.subject_id &&
                                                r.activity == a.activity;
                                     });
        REQUIRE(it != back.recordings.end());
        REQUIRE(it->n_samples() == a.n_samples());
        for (std::size_t k = 0; k < a.semg.data.size(); ++k)
            CHECK(it->semg.data[k] == doctest::Approx(a.semg.data[k]).epsilon(1e-12));
    }
}
