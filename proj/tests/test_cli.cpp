// End-to-end checks that drive the installed binaries as subprocesses:
// exit codes, stdout contracts, and artifact files.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "limbnet/dataset.hpp"

using namespace limbnet;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kCli = LIMBNET_CLI_PATH;
const std::string kSynth = LIMBNET_SYNTH_PATH;

struct CmdResult {
    int exit_code = -1;
    std::string out;  // stdout + stderr, interleaved
};

CmdResult run(const std::string& cmd) {
    CmdResult r;
    FILE* p = popen((cmd + " 2>&1").c_str(), "r");
    REQUIRE(p != nullptr);
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    const int status = pclose(p);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string read_file(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

// Shared 6-subject dataset + split, generated once: H01-H03, A01-A03,
// 640 samples -> 3 windows per recording at the default 256/192.
struct Workspace {
    fs::path root = "cli_tmp";
    fs::path data = root / "data";
    std::string manifest = (data / "manifest.csv").string();
    std::string split = (root / "split.json").string();

    Workspace() {
        fs::remove_all(root);
        fs::create_directories(root);
        CmdResult synth =
            run(kSynth + " --out-dir " + data.string() + " --subjects 6 --samples 640 --seed 3");
        REQUIRE(synth.exit_code == 0);
        CmdResult split_r = run(kCli + " split --manifest " + manifest +
                                " --val-healthy H01 --val-abnormal A01"
                                " --test-healthy H02 --test-abnormal A02 --out " + split);
        REQUIRE(split_r.exit_code == 0);
    }
};

Workspace& ws() {
    static Workspace w;
    return w;
}

}  // namespace

// ======================================================================
// limbnet_synth
// ======================================================================

TEST_CASE("cli: synth writes a loadable manifest and is seed-deterministic") {
    CHECK(ws().manifest.find("manifest.csv") != std::string::npos);
    CHECK(run(kSynth + " --out-dir cli_tmp/data2 --subjects 6 --samples 640 --seed 3").exit_code ==
          0);
    CHECK(read_file("cli_tmp/data2/manifest.csv") == read_file(ws().manifest));
    CHECK(read_file("cli_tmp/data2/H01_healthy_gait.csv") ==
          read_file(ws().data / "H01_healthy_gait.csv"));

    Dataset ds = load_dataset(ws().manifest);
    CHECK(ds.recordings.size() == 18);
    CHECK(ds.subject_ids().size() == 6);

    // Stdout names the manifest and the sizes.
    CmdResult r = run(kSynth + " --out-dir cli_tmp/data3 --subjects 4 --samples 320 --seed 9");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("manifest") != std::string::npos);
    CHECK(r.out.find("12 recordings") != std::string::npos);
    CHECK(r.out.find("4 subjects") != std::string::npos);
}

// ======================================================================
// split
// ======================================================================

TEST_CASE("cli: split emits the plan JSON and reruns byte-identically") {
    json plan = json::parse(read_file(ws().split));
    CHECK(plan["train"].size() == 2);  // H03, A03
    CHECK(plan["val"] == json({"A01", "H01"}));
    CHECK(plan["test"] == json({"A02", "H02"}));

    const std::string again = "cli_tmp/split_again.json";
    CmdResult r = run(kCli + " split --manifest " + ws().manifest +
                      " --val-healthy H01 --val-abnormal A01"
                      " --test-healthy H02 --test-abnormal A02 --out " + again);
    CHECK(r.exit_code == 0);
    CHECK(read_file(again) == read_file(ws().split));
}

TEST_CASE("cli: split validation failures exit 2 and name the subject") {
    CmdResult r = run(kCli + " split --manifest " + ws().manifest +
                      " --val-healthy H01 --val-abnormal A01"
                      " --test-healthy H01 --test-abnormal A02 --out cli_tmp/bad.json");
    CHECK(r.exit_code == 2);
    CHECK(r.out.find("H01") != std::string::npos);

    r = run(kCli + " split --manifest " + ws().manifest +
            " --val-healthy H99 --val-abnormal A01"
            " --test-healthy H02 --test-abnormal A02 --out cli_tmp/bad.json");
    CHECK(r.exit_code == 2);
    CHECK(r.out.find("H99") != std::string::npos);

    // Missing required flag is a usage error too.
    r = run(kCli + " split --manifest " + ws().manifest);
    CHECK(r.exit_code == 2);
}

// ======================================================================
// train
// ======================================================================

TEST_CASE("cli: train writes weights and a report, deterministically") {
    const std::string cmd = kCli + " train --manifest " + ws().manifest + " --split " +
                            ws().split + " --epochs 2 --batch-size 8 --no-latency --seed 5";
    CmdResult a = run(cmd + " --out-dir cli_tmp/run_a");
    INFO(a.out);
    REQUIRE(a.exit_code == 0);
    CHECK(a.out.find("frames: train=18 val=18 test=18") != std::string::npos);
    CHECK(a.out.find("epoch   0  train_loss=") != std::string::npos);
    CHECK(a.out.find("epoch   1  train_loss=") != std::string::npos);
    CHECK(a.out.find("test accuracy") != std::string::npos);

    json report = json::parse(read_file("cli_tmp/run_a/report.json"));
    CHECK(report["report_version"] == 1);
    CHECK(report["epochs"].size() == 2);
    CHECK(report["parameter_count"]["total"] == 61635);
    CHECK(report["latency"].is_null());
    CHECK(report["confusion_test"].size() == 3);
    CHECK(report["split"]["train"].size() == 2);

    // Same command, fresh directory: identical weights bytes.
    CmdResult b = run(cmd + " --out-dir cli_tmp/run_b");
    REQUIRE(b.exit_code == 0);
    const std::string wa = read_file("cli_tmp/run_a/weights.bin");
    CHECK(wa.size() > 0);
    CHECK(read_file("cli_tmp/run_b/weights.bin") == wa);
}

TEST_CASE("cli: train on a missing manifest exits 1") {
    CmdResult r = run(kCli + " train --manifest cli_tmp/nope.csv --split " + ws().split +
                      " --epochs 1 --no-latency --out-dir cli_tmp/run_x");
    CHECK(r.exit_code == 1);
}

// ======================================================================
// evaluate
// ======================================================================

TEST_CASE("cli: evaluate prints a JSON report for the chosen partition") {
    CmdResult r = run(kCli + " evaluate --weights cli_tmp/run_a/weights.bin --manifest " +
                      ws().manifest + " --split " + ws().split + " --partition test");
    INFO(r.out);
    REQUIRE(r.exit_code == 0);
    json rep = json::parse(r.out);
    CHECK(rep["partition"] == "test");
    CHECK(rep["n_frames"] == 18);
    CHECK(rep["confusion"].size() == 3);
    CHECK(rep["metrics"]["accuracy_pct"].is_number());
    CHECK(rep["roc"].size() == 3);

    // --out mirrors stdout into a file.
    CmdResult r2 = run(kCli + " evaluate --weights cli_tmp/run_a/weights.bin --manifest " +
                       ws().manifest + " --split " + ws().split +
                       " --partition val --out cli_tmp/eval_val.json");
    REQUIRE(r2.exit_code == 0);
    json from_file = json::parse(read_file("cli_tmp/eval_val.json"));
    CHECK(from_file["partition"] == "val");
}

TEST_CASE("cli: evaluate rejects bad partitions and missing weights") {
    CmdResult r = run(kCli + " evaluate --weights cli_tmp/run_a/weights.bin --manifest " +
                      ws().manifest + " --split " + ws().split + " --partition everything");
    CHECK(r.exit_code == 2);

    r = run(kCli + " evaluate --weights cli_tmp/absent.bin --manifest " + ws().manifest +
            " --split " + ws().split + " --partition test");
    CHECK(r.exit_code == 1);
}

// ======================================================================
// predict
// ======================================================================

TEST_CASE("cli: predict emits one labeled row per window") {
    const std::string input = (ws().data / "H03_healthy_gait.csv").string();
    CmdResult r = run(kCli + " predict --weights cli_tmp/run_a/weights.bin --input " + input);
    INFO(r.out);
    REQUIRE(r.exit_code == 0);

    std::istringstream lines(r.out);
    std::string line;
    REQUIRE(std::getline(lines, line));
    CHECK(line == "offset,class,activity,p0,p1,p2");

    std::size_t rows = 0;
    while (std::getline(lines, line)) {
        if (line.empty()) continue;
        ++rows;
        // offset,class,activity,p0,p1,p2
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream cells(line);
        long offset = -1, cls = -1;
        std::string activity;
        double p0 = 0, p1 = 0, p2 = 0;
        cells >> offset >> cls >> activity >> p0 >> p1 >> p2;
        CHECK(offset == static_cast<long>((rows - 1) * 192));
        CHECK(cls >= 0);
        CHECK(cls < 3);
        CHECK_FALSE(activity.empty());
        CHECK(std::fabs(p0 + p1 + p2 - 1.0) < 1e-3);  // printed at 4 decimals
    }
    CHECK(rows == 3);  // (640 - 256)/192 + 1
}

TEST_CASE("cli: predict on a too-short recording exits 2") {
    std::ofstream f("cli_tmp/short.csv");
    f << "vm,st,bf,rf\n";
    for (int i = 0; i < 100; ++i) f << "0.1,0.2,0.3,0.4\n";
    f.close();
    CmdResult r = run(kCli + " predict --weights cli_tmp/run_a/weights.bin"
                             " --input cli_tmp/short.csv");
    CHECK(r.exit_code == 2);
}

// ======================================================================
// bench
// ======================================================================

TEST_CASE("cli: bench prints key=value latency lines") {
    CmdResult r = run(kCli + " bench --weights cli_tmp/run_a/weights.bin --iters 5 --warmup 1");
    INFO(r.out);
    REQUIRE(r.exit_code == 0);
    for (const char* key : {"mean_ms=", "p50_ms=", "p99_ms=", "n_iters=5", "cpu=", "os="})
        CHECK(r.out.find(key) != std::string::npos);

    CHECK(run(kCli + " bench --weights cli_tmp/run_a/weights.bin --iters 0").exit_code == 2);
}

// ======================================================================
// convert
// ======================================================================

TEST_CASE("cli: convert maps vendor columns onto the canonical set") {
    std::ofstream f("cli_tmp/vendor.csv");
    f << "t_s,Vastus,Semitendinosus,BicepsFem,RectusFem,Knee\n";
    for (int i = 0; i < 5; ++i)
        f << 0.001 * i << "," << 0.1 * i << "," << 0.2 * i << "," << 0.3 * i << "," << 0.4 * i
          << "," << 30 + i << "\n";
    f.close();

    CmdResult r = run(kCli + " convert --input cli_tmp/vendor.csv --output cli_tmp/S09_healthy_gait.csv"
                             " --vm-col Vastus --st-col Semitendinosus --bf-col BicepsFem"
                             " --rf-col RectusFem --time-col t_s --angle-col Knee");
    INFO(r.out);
    REQUIRE(r.exit_code == 0);

    Recording rec = load_recording("cli_tmp/S09_healthy_gait.csv");
    REQUIRE(rec.n_samples() == 5);
    CHECK(rec.semg.at(0, 2) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(rec.semg.at(3, 4) == doctest::Approx(1.6).epsilon(1e-12));
    REQUIRE(rec.knee_angle.has_value());
    CHECK((*rec.knee_angle)[4] == doctest::Approx(34.0).epsilon(1e-12));

    // Unknown source column -> exit 1 with the column named.
    r = run(kCli + " convert --input cli_tmp/vendor.csv --output cli_tmp/out.csv"
                   " --vm-col NotThere");
    CHECK(r.exit_code == 1);
    CHECK(r.out.find("notthere") != std::string::npos);
}

// ======================================================================
// misc
// ======================================================================

TEST_CASE("cli: no subcommand or an unknown one is a usage error") {
    CHECK(run(kCli).exit_code == 2);
    CHECK(run(kCli + " frobnicate").exit_code == 2);
    CHECK(run(kCli + " --help").exit_code == 0);
}
