#include "ketgpt/corpus.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

namespace ketgpt::corpus {

using qasm::Circuit;
using qasm::StatementKind;

bool CorpusStats::contains_statement(const std::string& text) const {
    if (lookup_.empty() && !unique_statements.empty())
        lookup_.insert(unique_statements.begin(), unique_statements.end());
    return lookup_.contains(text);
}

namespace {

bool is_body_statement(const qasm::Statement& s) {
    switch (s.kind) {
        case StatementKind::GateApp:
        case StatementKind::Measure:
        case StatementKind::Barrier:
            return true;
        default:
            return false;
    }
}

void accumulate(CorpusStats& stats, std::unordered_set<std::string>& seen,
                const Circuit& c, const std::string& name) {
    stats.qubit_counts.push_back(c.total_qubits());
    stats.gate_counts.push_back(qasm::gate_count(c));
    stats.file_names.push_back(name);
    for (const auto& s : c.statements) {
        if (!is_body_statement(s)) continue;
        std::string text = s.text();
        if (seen.insert(text).second)
            stats.unique_statements.push_back(std::move(text));
    }
}

}  // namespace

CorpusStats stats_from_circuits(const std::vector<Circuit>& circuits,
                                const std::vector<std::string>& names) {
    CorpusStats stats;
    std::unordered_set<std::string> seen;
    for (size_t i = 0; i < circuits.size(); i++)
        accumulate(stats, seen, circuits[i],
                   i < names.size() ? names[i] : std::to_string(i));
    return stats;
}

IngestResult ingest(const std::filesystem::path& dir, const PreprocessConfig& cfg) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".qasm")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    IngestResult res;
    std::unordered_set<std::string> seen;
    for (const auto& path : files) {
        std::ifstream in(path, std::ios::binary);
        std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
        qasm::ParseResult parsed;
        try {
            parsed = qasm::parse(text, qasm::ParseMode::Lenient);
        } catch (const qasm::SyntaxError& e) {
            res.skipped.push_back(path.filename().string() + ": " + e.what());
            continue;
        }
        const Circuit& c = parsed.circuit;
        if (static_cast<int>(c.statements.size()) > cfg.max_statements) {
            res.skipped.push_back(path.filename().string() + ": exceeds " +
                                  std::to_string(cfg.max_statements) +
                                  " statements");
            continue;
        }
        if (c.total_qubits() < cfg.min_qubits) {
            res.skipped.push_back(path.filename().string() + ": fewer than " +
                                  std::to_string(cfg.min_qubits) + " qubits");
            continue;
        }
        accumulate(res.stats, seen, c, path.filename().string());
        res.circuits.push_back(std::move(parsed.circuit));
    }
    if (res.circuits.empty())
        throw EmptyCorpus("no usable .qasm file under " + dir.string());
    return res;
}

std::pair<int, int> sample_target(const CorpusStats& stats, std::mt19937_64& rng) {
    std::uniform_int_distribution<size_t> qd(0, stats.qubit_counts.size() - 1);
    std::uniform_int_distribution<size_t> gd(0, stats.gate_counts.size() - 1);
    int q = stats.qubit_counts[qd(rng)];
    int g = stats.gate_counts[gd(rng)];
    return {q, g};
}

void CorpusStats::save_json(const std::filesystem::path& path) const {
    nlohmann::json j;
    j["qubit_counts"] = qubit_counts;
    j["gate_counts"] = gate_counts;
    j["unique_statements"] = unique_statements;
    j["file_names"] = file_names;
    j["vocab_size"] = unique_statements.size() + 3;
    std::ofstream out(path);
    out << j.dump(2) << '\n';
}

CorpusStats CorpusStats::load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    nlohmann::json j = nlohmann::json::parse(in);
    CorpusStats s;
    s.qubit_counts = j.at("qubit_counts").get<std::vector<int>>();
    s.gate_counts = j.at("gate_counts").get<std::vector<int>>();
    s.unique_statements = j.at("unique_statements").get<std::vector<std::string>>();
    s.file_names = j.at("file_names").get<std::vector<std::string>>();
    return s;
}

}  // namespace ketgpt::corpus
