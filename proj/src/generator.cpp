#include "ketgpt/generator.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>

namespace ketgpt::generator {

using vocab::StatementVocab;

std::string build_prompt(int qubit_count) {
    return "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[" +
           std::to_string(qubit_count) + "];\n";
}

std::vector<bool> build_mask(const StatementVocab& v, int qubit_count) {
    std::vector<bool> mask(v.size(), false);
    mask[StatementVocab::EOS] = true;
    for (int id = StatementVocab::kNumSpecials; id < v.size(); id++) {
        qasm::Statement st = qasm::parse_statement(v.text_of(id));
        bool ok = true;
        for (const auto& op : st.qubits)
            if (op.index >= qubit_count) { ok = false; break; }
        mask[id] = ok;
    }
    return mask;
}

namespace {

// Tokens that would complete a no_repeat_window-gram already present in
// `history` (standard no-repeat-n-gram blocking).
std::vector<int> banned_tokens(const std::vector<int>& history, int window) {
    std::vector<int> banned;
    const int w = window;
    const int n = static_cast<int>(history.size());
    if (w <= 0 || n < w - 1) return banned;
    const int* prefix = history.data() + (n - (w - 1));
    for (int i = 0; i + w <= n; i++) {
        if (std::equal(prefix, prefix + (w - 1), history.data() + i))
            banned.push_back(history[i + w - 1]);
    }
    return banned;
}

}  // namespace

int top_k_sample(const std::vector<double>& logits,
                 const GenerationConstraints& constraints,
                 const std::vector<int>& history, std::mt19937_64& rng) {
    const int V = static_cast<int>(logits.size());
    std::vector<double> masked(logits);
    for (int i = 0; i < V; i++)
        if (i >= static_cast<int>(constraints.allowed_mask.size()) ||
            !constraints.allowed_mask[i])
            masked[i] = -std::numeric_limits<double>::infinity();
    for (int t : banned_tokens(history, constraints.no_repeat_window))
        if (t < V) masked[t] = -std::numeric_limits<double>::infinity();

    std::vector<int> allowed;
    for (int i = 0; i < V; i++)
        if (masked[i] > -std::numeric_limits<double>::infinity()) allowed.push_back(i);
    if (allowed.empty()) throw Exhausted("every token is disallowed");

    std::vector<double> probs = nn::softmax(masked);
    // k highest by probability; equal logits break toward the lower token id.
    std::stable_sort(allowed.begin(), allowed.end(),
                     [&](int a, int b) { return probs[a] > probs[b]; });
    const int k = std::min<int>(constraints.top_k, static_cast<int>(allowed.size()));
    double total = 0.0;
    for (int i = 0; i < k; i++) total += probs[allowed[i]];

    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double u = unif(rng) * total;
    double acc = 0.0;
    for (int i = 0; i < k; i++) {
        acc += probs[allowed[i]];
        if (u < acc) return allowed[i];
    }
    return allowed[k - 1];
}

qasm::Circuit post_process(const std::vector<qasm::Statement>& body,
                           int declared_qubits) {
    std::map<std::string, int> qregs, cregs;
    for (const auto& st : body) {
        for (const auto& op : st.qubits) {
            int& sz = qregs[op.reg];
            sz = std::max(sz, op.index + 1);
        }
        for (const auto& op : st.clbits) {
            int& sz = cregs[op.reg];
            sz = std::max(sz, op.index + 1);
        }
    }
    int& q = qregs["q"];
    q = std::max({q, declared_qubits, 1});

    qasm::Circuit c;
    qasm::Statement header, include;
    header.kind = qasm::StatementKind::Header;
    include.kind = qasm::StatementKind::Include;
    c.statements.push_back(header);
    c.statements.push_back(include);
    for (const auto& [name, sz] : qregs) {
        qasm::Statement d;
        d.kind = qasm::StatementKind::QregDecl;
        d.reg_name = name;
        d.reg_size = sz;
        c.statements.push_back(d);
        c.qreg_sizes[name] = sz;
    }
    for (const auto& [name, sz] : cregs) {
        qasm::Statement d;
        d.kind = qasm::StatementKind::CregDecl;
        d.reg_name = name;
        d.reg_size = sz;
        c.statements.push_back(d);
        c.creg_sizes[name] = sz;
    }
    c.statements.insert(c.statements.end(), body.begin(), body.end());
    return c;
}

GenerationRecord generate(const nn::TransformerModel& model,
                          const StatementVocab& v,
                          const corpus::CorpusStats& stats, uint64_t seed,
                          int top_k, int no_repeat_window) {
    if (model.config.vocab_size != v.size())
        throw std::invalid_argument("model vocab_size does not match vocabulary");

    std::mt19937_64 rng(seed);
    auto [qubits, target] = corpus::sample_target(stats, rng);

    GenerationConstraints constraints;
    constraints.qubit_count = qubits;
    constraints.target_gates = target;
    constraints.top_k = top_k;
    constraints.no_repeat_window = no_repeat_window;
    constraints.allowed_mask = build_mask(v, qubits);
    constraints.seed = seed;

    GenerationRecord rec;
    rec.qubit_count = qubits;
    rec.target_gates = target;

    std::vector<int> tokens{StatementVocab::BOS};
    std::vector<qasm::Statement> body;
    while (rec.achieved_gates < target) {
        if (static_cast<int>(tokens.size()) >= model.config.n_positions) {
            rec.context_filled = true;
            break;
        }
        nn::Tensor2 logits = nn::forward(model, tokens);
        std::vector<double> last(logits.row(logits.rows - 1).begin(),
                                 logits.row(logits.rows - 1).end());
        int id = top_k_sample(last, constraints, tokens, rng);
        if (id == StatementVocab::EOS) {
            rec.stopped_by_eos = true;
            break;
        }
        tokens.push_back(id);
        qasm::Statement st = qasm::parse_statement(v.text_of(id));
        if (st.kind != qasm::StatementKind::Barrier) rec.achieved_gates++;
        body.push_back(std::move(st));
    }
    rec.circuit = post_process(body, qubits);
    return rec;
}

namespace {

constexpr char kMagic[8] = {'K', 'G', 'B', 'n', 'd', 'l', '1', '\0'};

void write_u32(std::ostream& out, uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
uint32_t read_u32(std::istream& in) {
    uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}
void write_str(std::ostream& out, const std::string& s) {
    write_u32(out, static_cast<uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}
std::string read_str(std::istream& in) {
    uint32_t n = read_u32(in);
    std::string s(n, '\0');
    in.read(s.data(), n);
    return s;
}
void write_strings(std::ostream& out, const std::vector<std::string>& v) {
    write_u32(out, static_cast<uint32_t>(v.size()));
    for (const auto& s : v) write_str(out, s);
}
std::vector<std::string> read_strings(std::istream& in) {
    std::vector<std::string> v(read_u32(in));
    for (auto& s : v) s = read_str(in);
    return v;
}
void write_ints(std::ostream& out, const std::vector<int>& v) {
    write_u32(out, static_cast<uint32_t>(v.size()));
    for (int x : v) write_u32(out, static_cast<uint32_t>(x));
}
std::vector<int> read_ints(std::istream& in) {
    std::vector<int> v(read_u32(in));
    for (int& x : v) x = static_cast<int>(read_u32(in));
    return v;
}

}  // namespace

void GeneratorBundle::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(kMagic, sizeof kMagic);
    nn::save_model(out, model);
    write_strings(out, vocab.texts);
    write_ints(out, stats.qubit_counts);
    write_ints(out, stats.gate_counts);
    write_strings(out, stats.file_names);
}

GeneratorBundle GeneratorBundle::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0)
        throw std::runtime_error("bad generator checkpoint: " + path.string());
    GeneratorBundle b;
    b.model = nn::load_model(in);
    corpus::CorpusStats stats;
    stats.unique_statements = read_strings(in);
    b.vocab = vocab::build_vocab(stats);
    b.stats = std::move(stats);
    b.stats.qubit_counts = read_ints(in);
    b.stats.gate_counts = read_ints(in);
    b.stats.file_names = read_strings(in);
    return b;
}

GeneratorTrainResult train_generator(const std::vector<qasm::Circuit>& circuits,
                                     const corpus::CorpusStats& stats,
                                     const nn::ModelConfig& model_cfg,
                                     const nn::TrainConfig& train_cfg) {
    GeneratorTrainResult res;
    res.bundle.vocab = vocab::build_vocab(stats);
    res.bundle.stats = stats;

    nn::ModelConfig cfg = model_cfg;
    cfg.vocab_size = res.bundle.vocab.size();
    cfg.causal = true;
    cfg.classifier_head = false;
    cfg.check();
    res.bundle.model = nn::TransformerModel::init(cfg, train_cfg.seed);
    nn::AdamWState adam = nn::AdamWState::init(res.bundle.model);

    std::vector<std::vector<int>> encoded;
    encoded.reserve(circuits.size());
    for (const auto& c : circuits) {
        auto seq = vocab::encode(c, res.bundle.vocab);
        if (static_cast<int>(seq.size()) > cfg.n_positions)
            seq.resize(cfg.n_positions);
        encoded.push_back(std::move(seq));
    }

    std::mt19937_64 rng(train_cfg.seed);
    std::vector<size_t> idx(encoded.size());
    for (size_t i = 0; i < idx.size(); i++) idx[i] = i;
    for (int epoch = 0; epoch < train_cfg.epochs; epoch++) {
        std::shuffle(idx.begin(), idx.end(), rng);
        double epoch_loss = 0.0;
        int batches = 0;
        for (size_t start = 0; start < idx.size();
             start += static_cast<size_t>(train_cfg.batch_size)) {
            std::vector<std::vector<int>> batch;
            for (size_t j = start;
                 j < std::min(idx.size(), start + train_cfg.batch_size); j++)
                batch.push_back(encoded[idx[j]]);
            epoch_loss += nn::train_step_lm(res.bundle.model, batch,
                                            vocab::StatementVocab::PAD, adam,
                                            train_cfg);
            batches++;
        }
        res.epoch_losses.push_back(epoch_loss / std::max(batches, 1));
    }
    return res;
}

}  // namespace ketgpt::generator
