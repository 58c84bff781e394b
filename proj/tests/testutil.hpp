#pragma once

// Shared helpers for the test binaries: scratch directories, CSV fixtures,
// deterministic synthetic datasets, and a child-process CLI runner.

#include <atomic>
#include <filesystem>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include "entgrove/dataset.hpp"
#include "entgrove/rng.hpp"
#include "entgrove/serial.hpp"

namespace testutil {

struct TempDir {
    std::filesystem::path path;

    TempDir() {
        static std::atomic<unsigned> counter{0};
        path = std::filesystem::temp_directory_path() /
               ("entgrove-test-" + std::to_string(::getpid()) + "-" +
                std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path / name).string(); }
};

inline entgrove::DatasetTable table_from_csv(const std::string& text, const std::string& label,
                                             char delimiter = ',') {
    TempDir dir;
    const std::string path = dir.file("data.csv");
    entgrove::write_text_file(path, text);
    return entgrove::load_csv(path, label, delimiter);
}

inline double uniform01(entgrove::SplitMix64& rng) {
    return static_cast<double>(rng.next() >> 11) * 0x1.0p-53;
}

// Mixed-kind table whose label is a pure function of the features, so the
// data is consistent by construction; label_noise > 0 relabels that share of
// rows with a random class (useful for pruning tests).
inline std::string synthetic_csv(std::uint64_t seed, std::size_t rows,
                                 std::size_t numeric_features, std::size_t categorical_features,
                                 std::size_t classes, double label_noise = 0.0) {
    entgrove::SplitMix64 rng(seed);
    std::string text;
    for (std::size_t j = 0; j < numeric_features; ++j) text += "n" + std::to_string(j) + ",";
    for (std::size_t j = 0; j < categorical_features; ++j) text += "c" + std::to_string(j) + ",";
    text += "family\n";
    for (std::size_t i = 0; i < rows; ++i) {
        std::size_t hash = 0;
        for (std::size_t j = 0; j < numeric_features; ++j) {
            const double v = uniform01(rng);
            hash = hash * 2 + (v > 0.5 ? 1 : 0);
            text += entgrove::double_to_string(v) + ",";
        }
        for (std::size_t j = 0; j < categorical_features; ++j) {
            const std::size_t tok = rng.next() % 3;
            hash = hash * 3 + tok;
            text += "t" + std::to_string(tok) + ",";
        }
        std::size_t cls = hash % classes;
        if (label_noise > 0.0 && uniform01(rng) < label_noise) {
            cls = rng.next() % classes;
        }
        text += "K" + std::to_string(cls) + "\n";
    }
    return text;
}

// 20 informative numeric features whose per-class means sit 0.2 apart with
// +/-0.04 jitter: trivially separable, mirroring a well-separated family
// classification task.
inline std::string separable_csv(std::uint64_t seed, std::size_t rows) {
    static const char* kFamilies[] = {"Adware", "Backdoor", "Trojan", "Virus", "Worm"};
    entgrove::SplitMix64 rng(seed);
    std::string text;
    for (std::size_t j = 0; j < 20; ++j) {
        text += "f" + std::to_string(j) + ",";
    }
    text += "family\n";
    for (std::size_t i = 0; i < rows; ++i) {
        const std::size_t cls = rng.next() % 5;
        for (std::size_t j = 0; j < 20; ++j) {
            const double center = (static_cast<double>(cls) + 0.5) / 5.0;
            const double jitter = (uniform01(rng) - 0.5) * 0.08;
            text += entgrove::double_to_string(center + jitter) + ",";
        }
        text += std::string(kFamilies[cls]) + "\n";
    }
    return text;
}

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

// Runs `binary` through /bin/sh with stdout/stderr captured in `dir`.
// `env_prefix` may carry VAR=value assignments.
inline CliResult run_cli(const std::string& binary, const std::string& args,
                         const TempDir& dir, const std::string& env_prefix = "") {
    const std::string out_path = dir.file("cli-stdout.txt");
    const std::string err_path = dir.file("cli-stderr.txt");
    std::string cmd;
    if (!env_prefix.empty()) cmd += env_prefix + " ";
    cmd += "'" + binary + "' " + args + " > '" + out_path + "' 2> '" + err_path + "'";
    const int status = std::system(cmd.c_str());

    CliResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = entgrove::read_text_file(out_path);
    result.err = entgrove::read_text_file(err_path);
    return result;
}

}  // namespace testutil
