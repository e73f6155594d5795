#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "ketgpt/corpus.hpp"
#include "ketgpt/model.hpp"
#include "ketgpt/qasm.hpp"
#include "ketgpt/vocab.hpp"

namespace ketgpt::generator {

struct GenerationConstraints {
    int qubit_count = 0;
    int target_gates = 0;
    int top_k = 5;
    int no_repeat_window = 15;
    std::vector<bool> allowed_mask;  // per token id
    uint64_t seed = 0;
};

struct Exhausted : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The three-line file header every corpus circuit starts with.
std::string build_prompt(int qubit_count);

// mask[t] is true iff every qubit index referenced by statement t is below
// qubit_count. EOS stays allowed; BOS/PAD never are.
std::vector<bool> build_mask(const vocab::StatementVocab& v, int qubit_count);

// Constrained top-k draw. Tokens masked out, plus any token that would
// complete an already-seen no_repeat_window-gram, get probability zero; the k
// most probable survivors are renormalized and sampled.
int top_k_sample(const std::vector<double>& logits,
                 const GenerationConstraints& constraints,
                 const std::vector<int>& history, std::mt19937_64& rng);

// Assembles header + declarations around a generated body. Register sizes are
// grown to cover every referenced index so the result passes strict validation.
qasm::Circuit post_process(const std::vector<qasm::Statement>& body,
                           int declared_qubits);

struct GenerationRecord {
    qasm::Circuit circuit;
    int qubit_count = 0;
    int target_gates = 0;
    int achieved_gates = 0;
    bool stopped_by_eos = false;
    bool context_filled = false;
};

GenerationRecord generate(const nn::TransformerModel& model,
                          const vocab::StatementVocab& v,
                          const corpus::CorpusStats& stats, uint64_t seed,
                          int top_k = 5, int no_repeat_window = 15);

struct GeneratorTrainResult;

// Self-contained generator checkpoint: model + vocabulary + sampling stats.
struct GeneratorBundle {
    nn::TransformerModel model;
    vocab::StatementVocab vocab;
    corpus::CorpusStats stats;

    void save(const std::filesystem::path& path) const;
    static GeneratorBundle load(const std::filesystem::path& path);
};

struct GeneratorTrainResult {
    GeneratorBundle bundle;
    std::vector<double> epoch_losses;
};

// Builds the statement vocabulary from stats, encodes every circuit, and runs
// next-token training with per-epoch shuffling. Sequences longer than
// n_positions are truncated. vocab_size in model_cfg is overridden.
GeneratorTrainResult train_generator(const std::vector<qasm::Circuit>& circuits,
                                     const corpus::CorpusStats& stats,
                                     const nn::ModelConfig& model_cfg,
                                     const nn::TrainConfig& train_cfg);

}  // namespace ketgpt::generator
