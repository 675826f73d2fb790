#include "limbnet/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace limbnet {

// ======================================================================
// Enum names
// ======================================================================

std::string to_string(Cohort c) {
    return c == Cohort::healthy ? "healthy" : "abnormal";
}

std::string to_string(Abnormality a) {
    switch (a) {
        case Abnormality::none: return "none";
        case Abnormality::acl: return "ACL";
        case Abnormality::meniscus: return "meniscus";
        case Abnormality::sciatic: return "sciatic";
    }
    return "none";
}

std::string to_string(Activity a) {
    switch (a) {
        case Activity::gait: return "gait";
        case Activity::standing_knee_flexion: return "standing_knee_flexion";
        case Activity::sitting_knee_extension: return "sitting_knee_extension";
    }
    return "gait";
}

namespace {

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

double parse_double(const std::string& cell, const std::string& file, std::size_t line_no,
                    const std::string& col) {
    double v = 0.0;
    const char* b = cell.data();
    const char* e = cell.data() + cell.size();
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e)
        throw parse_error(file, line_no,
                          "non-numeric value '" + cell + "' in column " + col);
    return v;
}

}  // namespace

Cohort cohort_from_string(const std::string& s) {
    const std::string t = lower(trim(s));
    if (t == "healthy") return Cohort::healthy;
    if (t == "abnormal") return Cohort::abnormal;
    throw std::invalid_argument("unknown cohort '" + s + "' (healthy|abnormal)");
}

Abnormality abnormality_from_string(const std::string& s) {
    const std::string t = lower(trim(s));
    if (t.empty() || t == "none") return Abnormality::none;
    if (t == "acl") return Abnormality::acl;
    if (t == "meniscus") return Abnormality::meniscus;
    if (t == "sciatic") return Abnormality::sciatic;
    throw std::invalid_argument("unknown abnormality '" + s + "'");
}

Activity activity_from_string(const std::string& s) {
    const std::string t = lower(trim(s));
    if (t == "gait") return Activity::gait;
    if (t == "standing_knee_flexion") return Activity::standing_knee_flexion;
    if (t == "sitting_knee_extension") return Activity::sitting_knee_extension;
    throw std::invalid_argument("unknown activity '" + s + "'");
}

// ======================================================================
// LabelMap / Dataset
// ======================================================================

int LabelMap::class_of(Activity a) const {
    for (std::size_t i = 0; i < classes.size(); ++i)
        if (classes[i] == a) return static_cast<int>(i);
    throw std::invalid_argument("label map does not cover activity " + to_string(a));
}

void LabelMap::validate() const {
    if (classes.size() != 3) throw std::invalid_argument("label map must list 3 activities");
    std::set<Activity> seen(classes.begin(), classes.end());
    if (seen.size() != 3)
        throw std::invalid_argument("label map must be a bijection onto {0,1,2}");
}

std::vector<std::string> Dataset::subject_ids() const {
    std::set<std::string> ids;
    for (const auto& r : recordings) ids.insert(r.meta.subject_id);
    return {ids.begin(), ids.end()};
}

// ======================================================================
// Canonical CSV ingestion
// ======================================================================

Recording load_recording(const std::string& path, const ColumnMap& column_map) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open recording file: " + path);

    auto mapped = [&](const std::string& key) {
        auto it = column_map.find(key);
        return lower(it == column_map.end() ? key : it->second);
    };

    std::string line;
    if (!std::getline(f, line)) throw parse_error(path, 1, "empty file, expected header row");
    std::vector<std::string> header = split_csv_line(line);
    for (auto& h : header) h = lower(h);

    auto col_index = [&](const std::string& name) -> std::ptrdiff_t {
        auto it = std::find(header.begin(), header.end(), name);
        return it == header.end() ? -1 : it - header.begin();
    };

    const char* channel_keys[kNumChannels] = {"vm", "st", "bf", "rf"};
    std::ptrdiff_t chan_col[kNumChannels];
    for (std::size_t c = 0; c < kNumChannels; ++c) {
        chan_col[c] = col_index(mapped(channel_keys[c]));
        if (chan_col[c] < 0)
            throw parse_error(path, 1,
                              "missing column '" + mapped(channel_keys[c]) + "' for channel " +
                                  channel_keys[c]);
    }
    const std::ptrdiff_t time_col = col_index(mapped("time"));
    const std::ptrdiff_t angle_col = col_index(mapped("angle"));

    std::vector<std::vector<double>> chans(kNumChannels);
    std::vector<double> angle;
    double prev_time = 0.0;
    bool have_prev_time = false;
    std::size_t line_no = 1;
    while (std::getline(f, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw parse_error(path, line_no,
                              "row has " + std::to_string(cells.size()) + " cells, header has " +
                                  std::to_string(header.size()));
        for (std::size_t c = 0; c < kNumChannels; ++c)
            chans[c].push_back(parse_double(cells[static_cast<std::size_t>(chan_col[c])], path,
                                            line_no, header[static_cast<std::size_t>(chan_col[c])]));
        if (angle_col >= 0)
            angle.push_back(parse_double(cells[static_cast<std::size_t>(angle_col)], path,
                                         line_no, "angle"));
        if (time_col >= 0) {
            const double t = parse_double(cells[static_cast<std::size_t>(time_col)], path,
                                          line_no, "time");
            if (have_prev_time && std::abs((t - prev_time) - 1.0 / kSampleRateHz) > 1e-6)
                throw parse_error(path, line_no,
                                  "time step " + std::to_string(t - prev_time) +
                                      " s does not match the declared 1000 Hz sample rate");
            prev_time = t;
            have_prev_time = true;
        }
    }
    const std::size_t n = chans[0].size();
    if (n == 0) throw parse_error(path, line_no, "no data rows");

    Recording rec;
    rec.meta = meta_from_filename(path, &rec.activity);
    rec.sample_rate = kSampleRateHz;
    rec.semg = TensorF::zeros({kNumChannels, n});
    for (std::size_t c = 0; c < kNumChannels; ++c)
        std::copy(chans[c].begin(), chans[c].end(), &rec.semg.at(c, 0));
    if (angle_col >= 0) rec.knee_angle = std::move(angle);
    return rec;
}

void write_recording(const Recording& rec, const std::string& path, bool with_time) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f.precision(17);
    if (with_time) f << "time,";
    f << "vm,st,bf,rf";
    if (rec.knee_angle) f << ",angle";
    f << "\n";
    const std::size_t n = rec.n_samples();
    for (std::size_t i = 0; i < n; ++i) {
        if (with_time) f << static_cast<double>(i) / rec.sample_rate << ",";
        for (std::size_t c = 0; c < kNumChannels; ++c) {
            if (c) f << ",";
            f << rec.semg.at(c, i);
        }
        if (rec.knee_angle) f << "," << (*rec.knee_angle)[i];
        f << "\n";
    }
    if (!f) throw std::runtime_error("write failed: " + path);
}

SubjectMeta meta_from_filename(const std::string& path, Activity* activity_out) {
    const std::string stem = fs::path(path).stem().string();
    SubjectMeta meta;
    meta.subject_id = stem;
    if (activity_out) *activity_out = Activity::gait;

    // "<subject>_<cohort>_<activity>": activity may itself contain
    // underscores, so scan for a cohort token and treat the rest as
    // subject | activity.
    std::vector<std::string> tokens;
    std::stringstream ss(stem);
    std::string tok;
    while (std::getline(ss, tok, '_')) tokens.push_back(tok);
    for (std::size_t i = 1; i + 1 < tokens.size(); ++i) {
        const std::string t = lower(tokens[i]);
        if (t != "healthy" && t != "abnormal") continue;
        std::string subject = tokens[0];
        for (std::size_t j = 1; j < i; ++j) subject += "_" + tokens[j];
        std::string activity = tokens[i + 1];
        for (std::size_t j = i + 2; j < tokens.size(); ++j) activity += "_" + tokens[j];
        try {
            const Activity a = activity_from_string(activity);
            meta.subject_id = subject;
            meta.cohort = cohort_from_string(t);
            if (activity_out) *activity_out = a;
        } catch (const std::invalid_argument&) {
            // not the convention; keep the fallback
        }
        break;
    }
    return meta;
}

// ======================================================================
// Manifest
// ======================================================================

Dataset load_dataset(const std::string& manifest_path, bool strict, const LabelMap& label_map) {
    label_map.validate();
    std::ifstream f(manifest_path);
    if (!f) throw std::runtime_error("cannot open manifest: " + manifest_path);
    const fs::path base = fs::path(manifest_path).parent_path();

    std::string line;
    if (!std::getline(f, line)) throw parse_error(manifest_path, 1, "empty manifest");
    std::vector<std::string> header = split_csv_line(line);
    for (auto& h : header) h = lower(h);
    const std::vector<std::string> expected = {"file", "subject_id", "cohort", "abnormality",
                                               "activity"};
    for (const auto& name : expected)
        if (std::find(header.begin(), header.end(), name) == header.end())
            throw parse_error(manifest_path, 1, "manifest missing column '" + name + "'");
    auto idx = [&](const std::string& name) {
        return static_cast<std::size_t>(std::find(header.begin(), header.end(), name) -
                                        header.begin());
    };

    Dataset ds;
    ds.label_map = label_map;
    std::set<std::pair<std::string, Activity>> seen;
    std::size_t line_no = 1;
    while (std::getline(f, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw parse_error(manifest_path, line_no, "row width mismatch");

        SubjectMeta meta;
        meta.subject_id = cells[idx("subject_id")];
        Activity activity;
        try {
            meta.cohort = cohort_from_string(cells[idx("cohort")]);
            meta.abnormality = abnormality_from_string(cells[idx("abnormality")]);
            activity = activity_from_string(cells[idx("activity")]);
        } catch (const std::invalid_argument& e) {
            throw parse_error(manifest_path, line_no, e.what());
        }
        if (meta.cohort == Cohort::healthy && meta.abnormality != Abnormality::none)
            throw parse_error(manifest_path, line_no,
                              "healthy subject " + meta.subject_id + " lists an abnormality");
        if (!seen.insert({meta.subject_id, activity}).second)
            throw parse_error(manifest_path, line_no,
                              "duplicate (subject, activity) pair: " + meta.subject_id + ", " +
                                  to_string(activity));

        const fs::path file = base / cells[idx("file")];
        Recording rec = load_recording(file.string());
        rec.meta = meta;
        rec.activity = activity;
        ds.recordings.push_back(std::move(rec));
    }

    if (strict) {
        const auto subjects = ds.subject_ids();
        if (subjects.size() != 22)
            throw std::runtime_error("strict mode: expected 22 subjects, manifest has " +
                                     std::to_string(subjects.size()));
        std::set<std::pair<std::string, Activity>> have;
        for (const auto& r : ds.recordings) have.insert({r.meta.subject_id, r.activity});
        for (const auto& s : subjects)
            for (Activity a : {Activity::gait, Activity::standing_knee_flexion,
                               Activity::sitting_knee_extension})
                if (!have.count({s, a}))
                    throw std::runtime_error("strict mode: subject " + s + " missing activity " +
                                             to_string(a));
    }
    return ds;
}

void write_manifest(const Dataset& ds, const std::vector<std::string>& files,
                    const std::string& manifest_path) {
    if (files.size() != ds.recordings.size())
        throw std::invalid_argument("write_manifest: one file name per recording required");
    std::ofstream f(manifest_path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open for writing: " + manifest_path);
    f << "file,subject_id,cohort,abnormality,activity\n";
    for (std::size_t i = 0; i < ds.recordings.size(); ++i) {
        const auto& r = ds.recordings[i];
        f << files[i] << "," << r.meta.subject_id << "," << to_string(r.meta.cohort) << ","
          << to_string(r.meta.abnormality) << "," << to_string(r.activity) << "\n";
    }
}

// ======================================================================
// Synthetic data
// ======================================================================

Dataset generate_synthetic_dataset(std::size_t n_subjects, std::size_t samples_per_recording,
                                   const ClassSignatureParams& params, Rng& rng,
                                   const LabelMap& label_map) {
    if (n_subjects < 3)
        throw std::invalid_argument("synthetic dataset needs at least 3 subjects");
    if (samples_per_recording == 0)
        throw std::invalid_argument("samples_per_recording must be > 0");
    if (params.class_freq_hz.size() != 3 || params.class_amp.size() != 3 ||
        params.channel_scale.size() != kNumChannels)
        throw std::invalid_argument("class signature params must cover 3 classes, 4 channels");
    if (params.noise_amp < 0.0 || params.subject_gain_lo > params.subject_gain_hi)
        throw std::invalid_argument("invalid noise or gain range");
    label_map.validate();

    Dataset ds;
    ds.label_map = label_map;
    const std::size_t n_healthy = (n_subjects + 1) / 2;
    const Abnormality kinds[3] = {Abnormality::acl, Abnormality::meniscus, Abnormality::sciatic};

    for (std::size_t s = 0; s < n_subjects; ++s) {
        const bool healthy = s < n_healthy;
        SubjectMeta meta;
        {
            std::ostringstream id;
            id << (healthy ? "H" : "A");
            const std::size_t k = healthy ? s + 1 : s - n_healthy + 1;
            if (k < 10) id << '0';
            id << k;
            meta.subject_id = id.str();
        }
        meta.cohort = healthy ? Cohort::healthy : Cohort::abnormal;
        meta.abnormality = healthy ? Abnormality::none : kinds[(s - n_healthy) % 3];

        std::vector<double> gain(kNumChannels);
        for (auto& g : gain) g = rng.uniform(params.subject_gain_lo, params.subject_gain_hi);

        for (int cls = 0; cls < 3; ++cls) {
            const Activity activity = label_map.activity_of(cls);
            Recording rec;
            rec.meta = meta;
            rec.activity = activity;
            rec.sample_rate = kSampleRateHz;
            rec.semg = TensorF::zeros({kNumChannels, samples_per_recording});
            const double freq = params.class_freq_hz[static_cast<std::size_t>(cls)];
            const double amp = params.class_amp[static_cast<std::size_t>(cls)];
            for (std::size_t c = 0; c < kNumChannels; ++c) {
                const double phase = rng.uniform(0.0, 2.0 * M_PI);
                const double a = amp * params.channel_scale[c] * gain[c];
                double* row = &rec.semg.at(c, 0);
                for (std::size_t t = 0; t < samples_per_recording; ++t) {
                    const double arg =
                        2.0 * M_PI * freq * static_cast<double>(t) / kSampleRateHz + phase;
                    double v = a * std::sin(arg);
                    if (params.noise_amp > 0.0) v += params.noise_amp * rng.normal();
                    row[t] = v;
                }
            }
            ds.recordings.push_back(std::move(rec));
        }
    }
    return ds;
}

std::string write_synthetic_dataset(const Dataset& ds, const std::string& out_dir) {
    fs::create_directories(out_dir);
    std::vector<std::string> files;
    for (const auto& rec : ds.recordings) {
        const std::string name = rec.meta.subject_id + "_" + to_string(rec.meta.cohort) + "_" +
                                 to_string(rec.activity) + ".csv";
        write_recording(rec, (fs::path(out_dir) / name).string());
        files.push_back(name);
    }
    const std::string manifest = (fs::path(out_dir) / "manifest.csv").string();
    write_manifest(ds, files, manifest);
    return manifest;
}

}  // namespace limbnet
