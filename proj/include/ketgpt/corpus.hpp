#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include "ketgpt/qasm.hpp"

namespace ketgpt::corpus {

struct PreprocessConfig {
    int max_statements = 1024;  // files above this are excluded, not truncated
    bool strip_comments = true;
    int min_qubits = 2;
};

struct CorpusStats {
    std::vector<int> qubit_counts;  // one entry per retained file
    std::vector<int> gate_counts;
    // Distinct canonical body-statement texts, first-appearance order over
    // sorted filenames then line order. Header/include/declarations excluded.
    std::vector<std::string> unique_statements;
    std::vector<std::string> file_names;

    int file_count() const { return static_cast<int>(file_names.size()); }
    bool contains_statement(const std::string& text) const;

    void save_json(const std::filesystem::path& path) const;
    static CorpusStats load_json(const std::filesystem::path& path);

private:
    mutable std::unordered_set<std::string> lookup_;  // lazy index
};

struct EmptyCorpus : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IngestResult {
    std::vector<qasm::Circuit> circuits;
    CorpusStats stats;
    std::vector<std::string> skipped;  // filename: reason
};

IngestResult ingest(const std::filesystem::path& dir,
                    const PreprocessConfig& cfg = {});

// Builds stats from in-memory circuits (used by tests and the classifier path).
CorpusStats stats_from_circuits(const std::vector<qasm::Circuit>& circuits,
                                const std::vector<std::string>& names);

// Independent uniform draws from the qubit-count and gate-count multisets.
std::pair<int, int> sample_target(const CorpusStats& stats, std::mt19937_64& rng);

}  // namespace ketgpt::corpus
