// Drives the installed command-line binary end to end through a subprocess.
// The binary path arrives via the LOWBRIDGE_BIN environment variable.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <nlohmann/json.hpp>

#include "lowbridge/data.hpp"
#include "lowbridge/image.hpp"
#include "lowbridge/pgm.hpp"

#include "support/tmpdir.hpp"

using namespace lowbridge;
namespace fs = std::filesystem;

namespace {

struct CmdResult {
    int exit_code = -1;
    std::string output; // stdout and stderr interleaved
};

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'')
            out += "'\"'\"'";
        else
            out += c;
    }
    out += "'";
    return out;
}

CmdResult run_cli(const std::vector<std::string>& args) {
    const char* bin = std::getenv("LOWBRIDGE_BIN");
    REQUIRE_MESSAGE(bin != nullptr, "LOWBRIDGE_BIN must point at the CLI binary");
    std::string cmd = shell_quote(bin);
    for (const auto& a : args)
        cmd += " " + shell_quote(a);
    cmd += " 2>&1";

    CmdResult res;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0)
        res.output.append(buf, n);
    int status = pclose(pipe);
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

std::string slurp(const std::string& p) { return testutil::slurp(p); }

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    out << text;
}

bool trees_identical(const std::string& a, const std::string& b) {
    int count_a = 0;
    for (const auto& entry : fs::recursive_directory_iterator(a)) {
        if (!entry.is_regular_file())
            continue;
        ++count_a;
        const fs::path twin = fs::path(b) / fs::relative(entry.path(), a);
        if (!fs::exists(twin) || slurp(entry.path().string()) != slurp(twin.string()))
            return false;
    }
    int count_b = 0;
    for (const auto& entry : fs::recursive_directory_iterator(b))
        if (entry.is_regular_file())
            ++count_b;
    return count_a == count_b;
}

} // namespace

TEST_CASE("help text names every subcommand and the thread cap") {
    CmdResult res = run_cli({"--help"});
    CHECK(res.exit_code == 0);
    for (const char* cmd :
         {"synth", "edges", "train-gen", "train-seg", "infer", "eval", "baseline"})
        CHECK(res.output.find(cmd) != std::string::npos);
    CHECK(res.output.find("LOWBRIDGE_THREADS") != std::string::npos);
}

TEST_CASE("usage errors exit with code 1") {
    CHECK(run_cli({}).exit_code == 1);                       // missing subcommand
    CHECK(run_cli({"synth"}).exit_code == 1);                // missing --out
    CHECK(run_cli({"edges", "--in", "/nonexistent.pgm"}).exit_code == 1);
    CHECK(run_cli({"frobnicate"}).exit_code == 1);           // unknown subcommand
    CHECK(run_cli({"baseline", "--mode", "sideways", "--train-manifest", "x",
                   "--test-manifest", "y", "--out", "z"})
              .exit_code == 1);
}

TEST_CASE("synth is deterministic across invocations") {
    testutil::TmpDir tmp("cli_synth");
    std::vector<std::string> base = {"synth", "--seed",  "1",  "--n-train", "3",
                                     "--n-test", "2", "--size", "32"};
    auto with_out = [&](const std::string& dir) {
        std::vector<std::string> args = base;
        args.push_back("--out");
        args.push_back(dir);
        return args;
    };
    CmdResult r1 = run_cli(with_out(tmp.file("d1")));
    REQUIRE_MESSAGE(r1.exit_code == 0, r1.output);
    CmdResult r2 = run_cli(with_out(tmp.file("d2")));
    REQUIRE(r2.exit_code == 0);
    CHECK(trees_identical(tmp.file("d1"), tmp.file("d2")));

    // The printed manifest paths exist.
    CHECK(r1.output.find("manifest_a_train.json") != std::string::npos);
    CHECK(fs::exists(tmp.file("d1/manifest_b_test.json")));
    CHECK(fs::exists(tmp.file("d1/synth_config.json")));

    // A different seed changes the data.
    std::vector<std::string> other = {"synth", "--seed", "2",      "--n-train", "3", "--n-test",
                                      "2",     "--size", "32", "--out",     tmp.file("d3")};
    REQUIRE(run_cli(other).exit_code == 0);
    CHECK(!trees_identical(tmp.file("d1"), tmp.file("d3")));
}

TEST_CASE("edges on a constant image produces an all-zero edge map") {
    testutil::TmpDir tmp("cli_edges");
    Image img(32, 32);
    for (float& v : img.v)
        v = 0.6f;
    save_image(tmp.file("flat.pgm"), img);

    CmdResult res = run_cli({"edges", "--in", tmp.file("flat.pgm")});
    REQUIRE_MESSAGE(res.exit_code == 0, res.output);
    const std::string out_path = tmp.file("flat.edges.pgm"); // default naming
    REQUIRE(fs::exists(out_path));
    PgmData pgm = read_pgm(out_path);
    CHECK(pgm.width == 32);
    CHECK(pgm.maxval == 255);
    for (auto p : pgm.pixels)
        CHECK(p == 0);

    SUBCASE("explicit output path and thresholds") {
        CmdResult r2 = run_cli({"edges", "--in", tmp.file("flat.pgm"), "--out",
                                tmp.file("e.pgm"), "--sigma", "2.0", "--low", "0.05", "--high",
                                "0.2"});
        CHECK(r2.exit_code == 0);
        CHECK(fs::exists(tmp.file("e.pgm")));
    }
    SUBCASE("contradictory thresholds fail validation") {
        CmdResult r3 = run_cli({"edges", "--in", tmp.file("flat.pgm"), "--low", "0.5", "--high",
                                "0.2"});
        CHECK(r3.exit_code == 1);
    }
}

TEST_CASE("config files are validated strictly") {
    testutil::TmpDir tmp("cli_cfg");
    REQUIRE(run_cli({"synth", "--seed", "1", "--n-train", "3", "--n-test", "1", "--size", "32",
                     "--out", tmp.file("data")})
                .exit_code == 0);
    const std::string manifest = tmp.file("data/manifest_a_train.json");

    SUBCASE("unknown section") {
        write_text(tmp.file("bad.json"), R"({"bogus": {}})");
        CmdResult res = run_cli({"train-gen", "--manifest", manifest, "--out", tmp.file("run"),
                                 "--config", tmp.file("bad.json")});
        CHECK(res.exit_code == 1);
        CHECK(res.output.find("bogus") != std::string::npos);
    }
    SUBCASE("unknown key inside a section") {
        write_text(tmp.file("bad2.json"), R"({"generator": {"warmup": 5}})");
        CmdResult res = run_cli({"train-gen", "--manifest", manifest, "--out", tmp.file("run"),
                                 "--config", tmp.file("bad2.json")});
        CHECK(res.exit_code == 1);
        CHECK(res.output.find("warmup") != std::string::npos);
    }
    SUBCASE("malformed JSON") {
        write_text(tmp.file("bad3.json"), "{");
        CmdResult res = run_cli({"train-gen", "--manifest", manifest, "--out", tmp.file("run"),
                                 "--config", tmp.file("bad3.json")});
        CHECK(res.exit_code == 1);
    }
}

TEST_CASE("full recipe: synth, train, infer, eval, baseline") {
    testutil::TmpDir tmp("cli_recipe");
    REQUIRE(run_cli({"synth", "--seed", "1", "--n-train", "4", "--n-test", "2", "--size", "32",
                     "--out", tmp.file("data")})
                .exit_code == 0);
    const std::string a_train = tmp.file("data/manifest_a_train.json");
    const std::string b_test = tmp.file("data/manifest_b_test.json");

    const std::vector<std::string> small = {"--epochs", "1",  "--batch-size",    "2",
                                            "--input-size", "32", "--base-channels", "4",
                                            "--depth",      "2",  "--seed",          "3"};
    auto with_small = [&](std::vector<std::string> args) {
        args.insert(args.end(), small.begin(), small.end());
        return args;
    };

    CmdResult g = run_cli(with_small(
        {"train-gen", "--manifest", a_train, "--out", tmp.file("gen_run")}));
    REQUIRE_MESSAGE(g.exit_code == 0, g.output);
    CHECK(g.output.find("final loss") != std::string::npos);
    CHECK(fs::exists(tmp.file("gen_run/gen.ckpt")));
    CHECK(fs::exists(tmp.file("gen_run/config.json")));
    CHECK(fs::exists(tmp.file("gen_run/run_record.jsonl")));
    CHECK(fs::exists(tmp.file("gen_run/run_summary.json")));

    CmdResult s = run_cli(with_small({"train-seg", "--manifest", a_train, "--gen-ckpt",
                                      tmp.file("gen_run/gen.ckpt"), "--out",
                                      tmp.file("seg_run")}));
    REQUIRE_MESSAGE(s.exit_code == 0, s.output);
    CHECK(fs::exists(tmp.file("seg_run/seg.ckpt")));

    CmdResult i = run_cli({"infer", "--manifest", b_test, "--gen-ckpt",
                           tmp.file("gen_run/gen.ckpt"), "--seg-ckpt",
                           tmp.file("seg_run/seg.ckpt"), "--out", tmp.file("preds")});
    REQUIRE_MESSAGE(i.exit_code == 0, i.output);
    CHECK(fs::exists(tmp.file("preds/img_0000.pred.pgm")));
    CHECK(fs::exists(tmp.file("preds/img_0001.pred.pgm")));
    CHECK(fs::exists(tmp.file("preds/infer_config.json")));
    // Predictions are valid label maps for the dataset's class count.
    LabelMap pred = load_label(tmp.file("preds/img_0000.pred.pgm"), 3);
    CHECK(pred.h == 32);

    CmdResult e = run_cli({"eval", "--manifest", b_test, "--pred-dir", tmp.file("preds"),
                           "--out", tmp.file("report")});
    REQUIRE_MESSAGE(e.exit_code == 0, e.output);
    CHECK(fs::exists(tmp.file("report/report.json")));
    CHECK(fs::exists(tmp.file("report/report.csv")));
    CHECK(e.output.find("dice") != std::string::npos);
    nlohmann::json rep = nlohmann::json::parse(slurp(tmp.file("report/report.json")));
    CHECK(rep.at("n_samples").get<int>() == 2);
    CHECK(rep.at("classes").size() == 3);

    CmdResult b = run_cli(with_small({"baseline", "--mode", "supervised", "--train-manifest",
                                      tmp.file("data/manifest_b_train.json"), "--test-manifest",
                                      b_test, "--out", tmp.file("base_run")}));
    REQUIRE_MESSAGE(b.exit_code == 0, b.output);
    CHECK(fs::exists(tmp.file("base_run/report.json")));
    CHECK(fs::exists(tmp.file("base_run/report.csv")));
    CHECK(fs::exists(tmp.file("base_run/run_summary.json")));

    SUBCASE("missing prediction file is a runtime failure") {
        fs::remove(tmp.file("preds/img_0001.pred.pgm"));
        CmdResult bad = run_cli({"eval", "--manifest", b_test, "--pred-dir", tmp.file("preds"),
                                 "--out", tmp.file("report2")});
        CHECK(bad.exit_code == 2);
    }
}

TEST_CASE("training divergence maps to the runtime exit code") {
    testutil::TmpDir tmp("cli_div");
    REQUIRE(run_cli({"synth", "--seed", "1", "--n-train", "3", "--n-test", "1", "--size", "32",
                     "--out", tmp.file("data")})
                .exit_code == 0);
    const std::string a_train = tmp.file("data/manifest_a_train.json");
    REQUIRE(run_cli({"train-gen", "--manifest", a_train, "--out", tmp.file("gen_run"),
                     "--epochs", "1", "--batch-size", "3", "--input-size", "32",
                     "--base-channels", "4", "--depth", "2"})
                .exit_code == 0);

    write_text(tmp.file("explode.json"),
               R"({"segmenter": {"weights": {"alpha_ce": 3e38, "alpha_dice": 3e38}}})");
    CmdResult res = run_cli({"train-seg", "--manifest", a_train, "--gen-ckpt",
                             tmp.file("gen_run/gen.ckpt"), "--out", tmp.file("seg_run"),
                             "--epochs", "2", "--batch-size", "3", "--input-size", "32",
                             "--base-channels", "4", "--depth", "2", "--config",
                             tmp.file("explode.json")});
    CHECK(res.exit_code == 2);
    CHECK(res.output.find("diverged") != std::string::npos);
}

TEST_CASE("config file values take effect and flags beat them") {
    testutil::TmpDir tmp("cli_merge");
    REQUIRE(run_cli({"synth", "--seed", "1", "--n-train", "3", "--n-test", "1", "--size", "32",
                     "--out", tmp.file("data")})
                .exit_code == 0);
    const std::string manifest = tmp.file("data/manifest_a_train.json");

    write_text(tmp.file("cfg.json"),
               R"({"train": {"epochs": 1, "batch_size": 3, "input_size": 32,
                   "model": {"base_channels": 4, "depth": 2}},
                   "generator": {"seed": 21}})");
    CmdResult r = run_cli({"train-gen", "--manifest", manifest, "--out", tmp.file("run"),
                           "--config", tmp.file("cfg.json"), "--epochs", "2"});
    REQUIRE_MESSAGE(r.exit_code == 0, r.output);

    nlohmann::json echoed = nlohmann::json::parse(slurp(tmp.file("run/config.json")));
    CHECK(echoed.at("epochs").get<int>() == 2); // flag wins over file
    CHECK(echoed.at("batch_size").get<int>() == 3);
    CHECK(echoed.at("seed").get<int>() == 21); // stage section wins over shared section
    CHECK(echoed.at("model").at("base_channels").get<int>() == 4);

    nlohmann::json summary = nlohmann::json::parse(slurp(tmp.file("run/run_summary.json")));
    CHECK(summary.at("epochs").get<int>() == 2);
}
