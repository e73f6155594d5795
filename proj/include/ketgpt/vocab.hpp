#pragma once

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "ketgpt/corpus.hpp"
#include "ketgpt/qasm.hpp"

namespace ketgpt::vocab {

// One token per distinct canonical QASM statement. Tokens 0..2 are specials;
// statement tokens are contiguous from 3.
struct StatementVocab {
    static constexpr int BOS = 0;
    static constexpr int EOS = 1;
    static constexpr int PAD = 2;
    static constexpr int kNumSpecials = 3;

    std::vector<std::string> texts;  // texts[i] is the statement for token i+3
    std::unordered_map<std::string, int> ids;

    int size() const { return static_cast<int>(texts.size()) + kNumSpecials; }
    const std::string& text_of(int id) const;
    int id_of(const std::string& text) const;  // -1 if absent

    void save_json(const std::filesystem::path& path) const;
    static StatementVocab load_json(const std::filesystem::path& path);
};

struct UnknownStatement : std::runtime_error {
    explicit UnknownStatement(const std::string& text)
        : std::runtime_error("statement not in vocabulary: " + text) {}
};

struct InvalidToken : std::runtime_error {
    explicit InvalidToken(int id)
        : std::runtime_error("token id out of range: " + std::to_string(id)) {}
};

StatementVocab build_vocab(const corpus::CorpusStats& stats);

// BOS + one id per body statement + EOS. Header/include/declarations skipped.
std::vector<int> encode(const qasm::Circuit& c, const StatementVocab& v);

std::vector<qasm::Statement> decode(const std::vector<int>& ids,
                                    const StatementVocab& v);

}  // namespace ketgpt::vocab
