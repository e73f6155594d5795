#pragma once

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "ketgpt/model.hpp"
#include "ketgpt/qasm.hpp"

namespace ketgpt::classifier {

// Greedy pair-merge sub-word vocabulary over raw QASM text.
struct SubwordVocab {
    static constexpr int CLS = 0;
    static constexpr int SEP = 1;
    static constexpr int PAD = 2;
    static constexpr int UNK = 3;
    static constexpr int kNumSpecials = 4;
    static constexpr int kMaxLen = 512;

    std::vector<std::string> pieces;  // pieces[i] is token i+4
    std::unordered_map<std::string, int> ids;

    int size() const { return static_cast<int>(pieces.size()) + kNumSpecials; }
    int add_piece(const std::string& p);
};

// Learns merges from whitespace-pre-split words until the vocabulary reaches
// target_vocab_size (ties broken by lexicographic pair order).
SubwordVocab train_subword(const std::vector<std::string>& texts,
                           int target_vocab_size);

// CLS + greedy longest-piece segmentation, truncated to max_len tokens.
// Unknown characters map to UNK. max_len defaults to the 512-token cap but is
// clamped by callers to the model's position budget.
std::vector<int> encode_for_classifier(const std::string& text,
                                       const SubwordVocab& v,
                                       int max_len = SubwordVocab::kMaxLen);

struct ConfusionMatrix {
    int tp = 0, tn = 0, fp = 0, fn = 0;  // positive class = random (label 1)
    int total() const { return tp + tn + fp + fn; }
    double accuracy() const {
        return total() ? static_cast<double>(tp + tn) / total() : 0.0;
    }
};

struct ImbalancedDataset : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SplitReport {
    std::vector<std::string> train_files, test_files;
    // algorithm-family filename prefixes present on both sides of the split
    std::vector<std::string> shared_prefixes;
};

struct ClassifierBundle {
    nn::TransformerModel model;
    SubwordVocab subword;

    // (label, probability of that label)
    std::pair<int, double> classify(const qasm::Circuit& c) const;
    std::pair<int, double> classify_text(const std::string& text) const;

    void save(const std::filesystem::path& path) const;
    static ClassifierBundle load(const std::filesystem::path& path);
};

struct TrainResult {
    ClassifierBundle bundle;
    ConfusionMatrix held_out;
    SplitReport split;
    std::vector<double> epoch_losses;
};

// Real circuits are label 0, random label 1. Requires equal counts.
// `names` parallel to `real` give filenames for the split report (optional).
TrainResult train_classifier(const std::vector<qasm::Circuit>& real,
                             const std::vector<qasm::Circuit>& random,
                             const nn::ModelConfig& model_cfg,
                             const nn::TrainConfig& train_cfg,
                             double train_fraction = 0.85,
                             const std::vector<std::string>& real_names = {},
                             int subword_vocab_size = 256);

}  // namespace ketgpt::classifier
