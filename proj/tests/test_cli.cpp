// Integration tests that drive the installed binary as a child process.
// Usage: cli_tests <path-to-entgrove> [doctest flags...]

#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest/doctest.h>

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "entgrove/serial.hpp"
#include "testutil.hpp"

namespace {

std::string g_binary;

testutil::CliResult cli(const std::string& args, const testutil::TempDir& dir,
                        const std::string& env = "") {
    return testutil::run_cli(g_binary, args, dir, env);
}

std::string fixture_csv(const testutil::TempDir& dir, std::uint64_t seed = 5,
                        std::size_t rows = 200) {
    const std::string path = dir.file("data.csv");
    entgrove::write_text_file(path, testutil::synthetic_csv(seed, rows, 3, 2, 3));
    return path;
}

std::size_t line_count(const std::string& text) {
    std::size_t n = 0;
    for (char c : text) {
        if (c == '\n') ++n;
    }
    return n;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("train writes the model, selection, and plan artifacts") {
    testutil::TempDir dir;
    const std::string data = fixture_csv(dir);
    auto r = cli("train --data '" + data + "' --label family --seed 4 --out '" +
                     dir.file("run") + "'",
                 dir);
    CHECK(r.exit_code == 0);
    CHECK(std::filesystem::exists(dir.file("run/model.json")));
    CHECK(std::filesystem::exists(dir.file("run/selection.json")));
    CHECK(std::filesystem::exists(dir.file("run/plan.json")));
    CHECK(std::filesystem::exists(dir.file("run/run_manifest.json")));
    CHECK(r.out.find("model digest:") != std::string::npos);
}

TEST_CASE("usage errors exit 2; --help exits 0") {
    testutil::TempDir dir;
    const std::string data = fixture_csv(dir);
    CHECK(cli("train --data '" + data + "' --out '" + dir.file("x") + "'", dir).exit_code == 2);
    CHECK(cli("train --data '" + data + "' --label family --criterion gini --out '" +
                  dir.file("x") + "'",
              dir).exit_code == 2);
    CHECK(cli("train --data '" + data + "' --label family --select bogus --out '" +
                  dir.file("x") + "'",
              dir).exit_code == 2);
    CHECK(cli("--help", dir).exit_code == 0);
    CHECK(cli("frobnicate", dir).exit_code == 2);
}

TEST_CASE("runtime failures exit 1 with a diagnostic") {
    testutil::TempDir dir;
    auto r = cli("train --data /no/such/file.csv --label family --out '" + dir.file("x") + "'",
                 dir);
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("error:") != std::string::npos);
}

TEST_CASE("identical seed and flags reproduce a byte-identical model") {
    testutil::TempDir dir;
    const std::string data = fixture_csv(dir);
    const std::string base = "train --data '" + data + "' --label family --seed 11 --out '";
    REQUIRE(cli(base + dir.file("a") + "'", dir).exit_code == 0);
    REQUIRE(cli(base + dir.file("b") + "'", dir).exit_code == 0);
    CHECK(entgrove::read_text_file(dir.file("a/model.json")) ==
          entgrove::read_text_file(dir.file("b/model.json")));

    auto r = cli("train --data '" + data + "' --label family --seed 12 --out '" +
                     dir.file("c") + "'",
                 dir);
    REQUIRE(r.exit_code == 0);
    CHECK(entgrove::read_text_file(dir.file("a/split.json")) !=
          entgrove::read_text_file(dir.file("c/split.json")));
}

TEST_CASE("ENTGROVE_SEED overrides --seed") {
    testutil::TempDir dir;
    const std::string data = fixture_csv(dir);
    auto r = cli("split --data '" + data + "' --label family --seed 1 --out '" +
                     dir.file("s") + "'",
                 dir, "ENTGROVE_SEED=777");
    REQUIRE(r.exit_code == 0);
    nlohmann::json split = entgrove::read_json_file(dir.file("s/split.json"));
    CHECK(split.at("seed") == 777);
    nlohmann::json manifest = entgrove::read_json_file(dir.file("s/run_manifest.json"));
    CHECK(manifest.at("seed_source") == "ENTGROVE_SEED");
}

TEST_CASE("split materializes stratified train and validation csvs") {
    testutil::TempDir dir;
    const std::string data = fixture_csv(dir, 21, 120);
    auto r = cli("split --data '" + data + "' --label family --seed 2 --train-fraction 0.5 "
                 "--out '" + dir.file("s") + "'",
                 dir);
    REQUIRE(r.exit_code == 0);
    const std::size_t train_rows = line_count(entgrove::read_text_file(dir.file("s/train.csv"))) - 1;
    const std::size_t val_rows =
        line_count(entgrove::read_text_file(dir.file("s/validation.csv"))) - 1;
    CHECK(train_rows + val_rows == 120);
    CHECK(train_rows <= 60);  // floor(n_c / 2) per class never exceeds half
}

TEST_CASE("select ranks features and honors the policy") {
    testutil::TempDir dir;
    const std::string data = fixture_csv(dir);
    auto r = cli("select --data '" + data + "' --label family --select top-k=2 --out '" +
                     dir.file("sel") + "'",
                 dir);
    REQUIRE(r.exit_code == 0);
    nlohmann::json selection = entgrove::read_json_file(dir.file("sel/selection.json"));
    CHECK(selection.at("selected").size() == 2);
    CHECK(r.out.find("feature | gain | gain_ratio | threshold") != std::string::npos);
}

TEST_CASE("eval emits a bounded report and reference rows on demand") {
    testutil::TempDir dir;
    const std::string data = fixture_csv(dir, 31, 240);
    REQUIRE(cli("train --data '" + data + "' --label family --seed 3 --out '" +
                    dir.file("run") + "'",
                dir).exit_code == 0);

    auto r = cli("eval --model '" + dir.file("run/model.json") + "' --data '" + data +
                     "' --out '" + dir.file("run") + "'",
                 dir);
    REQUIRE(r.exit_code == 0);
    nlohmann::json report = entgrove::read_json_file(dir.file("run/report.json"));
    CHECK(report.at("accuracy").get<double>() >= 0.0);
    CHECK(report.at("accuracy").get<double>() <= 1.0);
    CHECK(report.at("micro").at("recall") == report.at("accuracy"));
    CHECK(report.at("loss").get<double>() >= 0.0);
    CHECK(report.at("apt_ms").get<double>() > 0.0);
    CHECK(report.at("model_meta").at("reference_hyperparameters").at("optimizer") == "Adam");
    CHECK(r.out.find("ResNet18") == std::string::npos);

    auto with_ref = cli("eval --model '" + dir.file("run/model.json") + "' --data '" + data +
                            "' --reference --out '" + dir.file("run") + "'",
                        dir);
    REQUIRE(with_ref.exit_code == 0);
    CHECK(with_ref.out.find("94.14") != std::string::npos);
    CHECK(with_ref.out.find("98.69 | 98.76 | 97.67 | 0.086 | 97") != std::string::npos);
}

TEST_CASE("eval rejects data that lacks a selected feature") {
    testutil::TempDir dir;
    const std::string data = fixture_csv(dir);
    REQUIRE(cli("train --data '" + data + "' --label family --out '" + dir.file("run") + "'",
                dir).exit_code == 0);
    entgrove::write_text_file(dir.file("bad.csv"), "n0,family\n0.5,K0\n");
    auto r = cli("eval --model '" + dir.file("run/model.json") + "' --data '" +
                     dir.file("bad.csv") + "' --out '" + dir.file("run") + "'",
                 dir);
    CHECK(r.exit_code == 1);
    CHECK_FALSE(r.err.empty());
}

TEST_CASE("predict works on labeled and unlabeled input") {
    testutil::TempDir dir;
    const std::string data = fixture_csv(dir, 41, 60);
    REQUIRE(cli("train --data '" + data + "' --label family --out '" + dir.file("run") + "'",
                dir).exit_code == 0);

    auto labeled = cli("predict --model '" + dir.file("run/model.json") + "' --data '" + data +
                           "' --out '" + dir.file("p1") + "'",
                       dir);
    REQUIRE(labeled.exit_code == 0);
    const std::string csv = entgrove::read_text_file(dir.file("p1/predictions.csv"));
    CHECK(line_count(csv) == 61);  // header + one row per input
    CHECK(csv.rfind("prediction,p_K0,p_K1,p_K2", 0) == 0);

    // strip the label column -> still predicts
    std::string unlabeled_csv = testutil::synthetic_csv(41, 60, 3, 2, 3);
    std::string stripped = "n0,n1,n2,c0,c1\n";
    for (std::size_t pos = unlabeled_csv.find('\n') + 1; pos < unlabeled_csv.size();) {
        std::size_t eol = unlabeled_csv.find('\n', pos);
        std::size_t comma = unlabeled_csv.rfind(',', eol);
        stripped += unlabeled_csv.substr(pos, comma - pos) + "\n";
        pos = eol + 1;
    }
    entgrove::write_text_file(dir.file("unlabeled.csv"), stripped);
    auto bare = cli("predict --model '" + dir.file("run/model.json") + "' --data '" +
                        dir.file("unlabeled.csv") + "' --out '" + dir.file("p2") + "'",
                    dir);
    REQUIRE(bare.exit_code == 0);
    CHECK(line_count(entgrove::read_text_file(dir.file("p2/predictions.csv"))) == 61);
}

TEST_CASE("bench reports a positive per-sample latency") {
    testutil::TempDir dir;
    const std::string data = fixture_csv(dir, 61, 80);
    REQUIRE(cli("train --data '" + data + "' --label family --out '" + dir.file("run") + "'",
                dir).exit_code == 0);
    auto r = cli("bench --model '" + dir.file("run/model.json") + "' --data '" + data +
                     "' --repetitions 3 --out '" + dir.file("bench") + "'",
                 dir);
    REQUIRE(r.exit_code == 0);
    nlohmann::json report = entgrove::read_json_file(dir.file("bench/report.json"));
    CHECK(report.at("apt_ms").get<double>() > 0.0);
    CHECK(report.at("repetitions") == 3);
    CHECK(r.out.find("ms/sample") != std::string::npos);

    CHECK(cli("bench --model '" + dir.file("run/model.json") + "' --data '" + data +
                  "' --repetitions 0 --out '" + dir.file("bench") + "'",
              dir).exit_code == 2);
}

TEST_CASE("train with pruning and explicit policies still round-trips") {
    testutil::TempDir dir;
    const std::string path = dir.file("noisy.csv");
    entgrove::write_text_file(path, testutil::synthetic_csv(71, 300, 3, 1, 3, 0.2));
    auto r = cli("train --data '" + path +
                     "' --label family --seed 8 --criterion gain --select top-k=3 "
                     "--rank-by gain-ratio --prune --out '" + dir.file("run") + "'",
                 dir);
    REQUIRE(r.exit_code == 0);
    auto e = cli("eval --model '" + dir.file("run/model.json") + "' --data '" + path +
                     "' --out '" + dir.file("run") + "'",
                 dir);
    CHECK(e.exit_code == 0);
    nlohmann::json manifest = entgrove::read_json_file(dir.file("run/run_manifest.json"));
    CHECK(manifest.at("subcommand") == "eval");
}

}  // TEST_SUITE

int main(int argc, char** argv) {
    if (argc < 2 || argv[1][0] == '-') {
        std::fprintf(stderr, "usage: cli_tests <path-to-entgrove> [doctest flags]\n");
        return 64;
    }
    g_binary = std::filesystem::absolute(argv[1]).string();

    doctest::Context context;
    context.applyCommandLine(argc - 1, argv + 1);
    return context.run();
}
