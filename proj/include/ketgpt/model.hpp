#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "ketgpt/tensor.hpp"

namespace ketgpt::nn {

struct ModelConfig {
    int n_embd = 32;
    int n_layer = 2;
    int n_head = 2;
    int n_positions = 128;
    int vocab_size = 0;
    bool causal = true;           // generator true, classifier false
    bool classifier_head = false; // 2-way linear head on position 0

    int d_k() const { return n_embd / n_head; }
    void check() const;
    bool operator==(const ModelConfig&) const = default;
};

struct TrainConfig {
    int epochs = 3;
    int batch_size = 4;
    double learning_rate = 5e-5;
    double weight_decay = 0.01;
    uint64_t seed = 0;
};

struct SequenceTooLong : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NonFiniteLoss : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LayerParams {
    Tensor2 ln1_g, ln1_b;
    Tensor2 w_q, b_q, w_k, b_k, w_v, b_v, w_o, b_o;
    Tensor2 ln2_g, ln2_b;
    Tensor2 w_fc, b_fc, w_proj, b_proj;  // n_embd -> 4 n_embd -> n_embd
    bool operator==(const LayerParams&) const = default;
};

// Pre-norm GPT-2-style stack. Generator output head is tied to the token
// embedding; the classifier adds a separate 2-way head on position 0.
struct TransformerModel {
    ModelConfig config;
    Tensor2 tok_emb;  // vocab_size x n_embd
    Tensor2 pos_emb;  // n_positions x n_embd
    std::vector<LayerParams> layers;
    Tensor2 lnf_g, lnf_b;
    Tensor2 head_w, head_b;  // classifier only (2 x n_embd, 1 x 2)

    static TransformerModel init(const ModelConfig& cfg, uint64_t seed);
    static TransformerModel zeros_like(const TransformerModel& m);

    void for_each_param(const std::function<void(const std::string&, Tensor2&)>& fn);
    size_t param_count() const;

    bool operator==(const TransformerModel&) const = default;
};

// Optional instrumentation: per-layer, per-head attention matrices.
struct ForwardTrace {
    std::vector<Tensor2> attn_weights;  // n_layer * n_head entries, each T x T
};

// Logits: T x vocab_size (generator) or 1 x 2 (classifier head).
Tensor2 forward(const TransformerModel& m, const std::vector<int>& tokens,
                ForwardTrace* trace = nullptr);

// Cross-entropy + full analytic backprop, gradients accumulated into `grads`
// (same shape as the model). Generator: next-token prediction; positions whose
// target is `pad_id` are excluded. Returns (summed loss, counted positions).
std::pair<double, int> loss_and_grad_lm(const TransformerModel& m,
                                        const std::vector<int>& tokens,
                                        int pad_id, TransformerModel& grads);

// Classifier: 2-way cross-entropy on the pooled position. Returns the loss.
double loss_and_grad_cls(const TransformerModel& m, const std::vector<int>& tokens,
                         int label, TransformerModel& grads);

struct AdamWState {
    TransformerModel m_moment, v_moment;
    int64_t step = 0;
    static AdamWState init(const TransformerModel& model);
};

// Decoupled AdamW (beta1 0.9, beta2 0.999, eps 1e-8). Decay skips biases and
// layer-norm parameters.
void adamw_update(TransformerModel& model, TransformerModel& grads,
                  AdamWState& state, const TrainConfig& cfg);

// One optimizer step over a batch of sequences. Returns mean token-level
// cross-entropy (generator) before the update.
double train_step_lm(TransformerModel& model, const std::vector<std::vector<int>>& batch,
                     int pad_id, AdamWState& state, const TrainConfig& cfg);

// Classifier variant: mean per-example loss before the update.
double train_step_cls(TransformerModel& model, const std::vector<std::vector<int>>& batch,
                      const std::vector<int>& labels, AdamWState& state,
                      const TrainConfig& cfg);

void save_model(std::ostream& out, const TransformerModel& m);
TransformerModel load_model(std::istream& in);

}  // namespace ketgpt::nn
