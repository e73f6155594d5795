#include "ketgpt/classifier.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <map>
#include <random>
#include <set>

namespace ketgpt::classifier {

int SubwordVocab::add_piece(const std::string& p) {
    int id = size();
    pieces.push_back(p);
    ids[p] = id;
    return id;
}

SubwordVocab train_subword(const std::vector<std::string>& texts,
                           int target_vocab_size) {
    // Word = maximal run of non-whitespace; merges never cross word borders.
    // Every character (whitespace included) gets a base piece, so
    // segmentation is lossless.
    std::map<std::string, long> word_counts;
    std::set<char> alphabet;
    for (const auto& text : texts) {
        std::string word;
        for (char c : text) {
            alphabet.insert(c);
            if (std::isspace(static_cast<unsigned char>(c))) {
                if (!word.empty()) { word_counts[word]++; word.clear(); }
            } else {
                word.push_back(c);
            }
        }
        if (!word.empty()) word_counts[word]++;
    }

    SubwordVocab v;
    for (char c : alphabet) v.add_piece(std::string(1, c));
    if (target_vocab_size < v.size())
        throw std::invalid_argument("target_vocab_size below alphabet size");

    // Each word as a piece sequence, weighted by its corpus count.
    std::vector<std::pair<std::vector<std::string>, long>> words;
    for (const auto& [w, n] : word_counts) {
        std::vector<std::string> seq;
        for (char c : w) seq.emplace_back(1, c);
        words.push_back({std::move(seq), n});
    }

    while (v.size() < target_vocab_size) {
        std::map<std::pair<std::string, std::string>, long> pair_counts;
        for (const auto& [seq, n] : words)
            for (size_t i = 0; i + 1 < seq.size(); i++)
                pair_counts[{seq[i], seq[i + 1]}] += n;
        if (pair_counts.empty()) break;
        // most frequent pair; lexicographic pair order breaks ties
        auto best = pair_counts.begin();
        for (auto it = pair_counts.begin(); it != pair_counts.end(); ++it)
            if (it->second > best->second) best = it;
        const auto& [left, right] = best->first;
        std::string merged = left + right;
        v.add_piece(merged);
        for (auto& [seq, n] : words) {
            std::vector<std::string> out;
            for (size_t i = 0; i < seq.size(); i++) {
                if (i + 1 < seq.size() && seq[i] == left && seq[i + 1] == right) {
                    out.push_back(merged);
                    i++;
                } else {
                    out.push_back(seq[i]);
                }
            }
            seq = std::move(out);
        }
    }
    return v;
}

std::vector<int> encode_for_classifier(const std::string& text,
                                       const SubwordVocab& v, int max_len) {
    std::vector<int> out{SubwordVocab::CLS};
    size_t longest = 1;
    for (const auto& p : v.pieces) longest = std::max(longest, p.size());
    size_t i = 0;
    while (i < text.size() && static_cast<int>(out.size()) < max_len) {
        int id = SubwordVocab::UNK;
        size_t len = 1;
        for (size_t l = std::min(longest, text.size() - i); l >= 1; l--) {
            auto it = v.ids.find(text.substr(i, l));
            if (it != v.ids.end()) { id = it->second; len = l; break; }
        }
        out.push_back(id);
        i += len;
    }
    return out;
}

namespace {

std::string family_prefix(const std::string& name) {
    size_t cut = name.find_first_of("0123456789");
    return cut == std::string::npos ? name : name.substr(0, cut);
}

}  // namespace

TrainResult train_classifier(const std::vector<qasm::Circuit>& real,
                             const std::vector<qasm::Circuit>& random,
                             const nn::ModelConfig& model_cfg,
                             const nn::TrainConfig& train_cfg,
                             double train_fraction,
                             const std::vector<std::string>& real_names,
                             int subword_vocab_size) {
    if (real.size() != random.size())
        throw ImbalancedDataset("need equal real and random counts, got " +
                                std::to_string(real.size()) + " vs " +
                                std::to_string(random.size()));
    const size_t n = real.size();
    std::mt19937_64 rng(train_cfg.seed);

    // Stratified split: same train count from each class.
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; i++) order[i] = i;
    std::vector<size_t> order_real = order, order_rand = order;
    std::shuffle(order_real.begin(), order_real.end(), rng);
    std::shuffle(order_rand.begin(), order_rand.end(), rng);
    const size_t n_train = static_cast<size_t>(train_fraction * n);

    auto text_of = [](const qasm::Circuit& c) { return qasm::serialize(c); };

    std::vector<std::string> train_texts;
    std::vector<int> train_labels;
    std::vector<std::string> test_texts;
    std::vector<int> test_labels;
    TrainResult res;
    std::set<std::string> train_prefixes, test_prefixes;
    for (size_t i = 0; i < n; i++) {
        bool is_train = i < n_train;
        size_t ir = order_real[i], iq = order_rand[i];
        std::string rname =
            ir < real_names.size() ? real_names[ir] : "real_" + std::to_string(ir);
        (is_train ? train_texts : test_texts).push_back(text_of(real[ir]));
        (is_train ? train_labels : test_labels).push_back(0);
        (is_train ? train_texts : test_texts).push_back(text_of(random[iq]));
        (is_train ? train_labels : test_labels).push_back(1);
        (is_train ? res.split.train_files : res.split.test_files).push_back(rname);
        (is_train ? train_prefixes : test_prefixes).insert(family_prefix(rname));
    }
    for (const auto& p : train_prefixes)
        if (test_prefixes.contains(p)) res.split.shared_prefixes.push_back(p);

    SubwordVocab subword = train_subword(train_texts, subword_vocab_size);
    const int max_len = std::min(SubwordVocab::kMaxLen, model_cfg.n_positions);

    nn::ModelConfig cfg = model_cfg;
    cfg.vocab_size = subword.size();
    cfg.causal = false;
    cfg.classifier_head = true;
    nn::TransformerModel model = nn::TransformerModel::init(cfg, train_cfg.seed);
    nn::AdamWState adam = nn::AdamWState::init(model);

    std::vector<std::vector<int>> encoded;
    encoded.reserve(train_texts.size());
    for (const auto& t : train_texts)
        encoded.push_back(encode_for_classifier(t, subword, max_len));

    std::vector<size_t> idx(encoded.size());
    for (size_t i = 0; i < idx.size(); i++) idx[i] = i;
    for (int epoch = 0; epoch < train_cfg.epochs; epoch++) {
        std::shuffle(idx.begin(), idx.end(), rng);
        double epoch_loss = 0.0;
        int batches = 0;
        for (size_t start = 0; start < idx.size();
             start += static_cast<size_t>(train_cfg.batch_size)) {
            std::vector<std::vector<int>> batch;
            std::vector<int> labels;
            for (size_t j = start;
                 j < std::min(idx.size(), start + train_cfg.batch_size); j++) {
                batch.push_back(encoded[idx[j]]);
                labels.push_back(train_labels[idx[j]]);
            }
            epoch_loss += nn::train_step_cls(model, batch, labels, adam, train_cfg);
            batches++;
        }
        res.epoch_losses.push_back(epoch_loss / std::max(batches, 1));
    }

    res.bundle.model = std::move(model);
    res.bundle.subword = std::move(subword);
    for (size_t i = 0; i < test_texts.size(); i++) {
        auto [label, prob] = res.bundle.classify_text(test_texts[i]);
        int truth = test_labels[i];
        if (truth == 1 && label == 1) res.held_out.tp++;
        if (truth == 0 && label == 0) res.held_out.tn++;
        if (truth == 0 && label == 1) res.held_out.fp++;
        if (truth == 1 && label == 0) res.held_out.fn++;
    }
    return res;
}

std::pair<int, double> ClassifierBundle::classify_text(const std::string& text) const {
    const int max_len = std::min(SubwordVocab::kMaxLen, model.config.n_positions);
    std::vector<int> ids = encode_for_classifier(text, subword, max_len);
    nn::Tensor2 logits = nn::forward(model, ids);
    std::vector<double> p = nn::softmax(logits.row(0));
    int label = p[1] > p[0] ? 1 : 0;  // exact tie resolves to label 0
    return {label, p[label]};
}

std::pair<int, double> ClassifierBundle::classify(const qasm::Circuit& c) const {
    return classify_text(qasm::serialize(c));
}

namespace {
constexpr char kMagic[8] = {'K', 'G', 'C', 'l', 'a', 's', '1', '\0'};
void write_u32(std::ostream& out, uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
uint32_t read_u32(std::istream& in) {
    uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}
}  // namespace

void ClassifierBundle::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(kMagic, sizeof kMagic);
    nn::save_model(out, model);
    write_u32(out, static_cast<uint32_t>(subword.pieces.size()));
    for (const auto& p : subword.pieces) {
        write_u32(out, static_cast<uint32_t>(p.size()));
        out.write(p.data(), static_cast<std::streamsize>(p.size()));
    }
}

ClassifierBundle ClassifierBundle::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0)
        throw std::runtime_error("bad classifier checkpoint: " + path.string());
    ClassifierBundle b;
    b.model = nn::load_model(in);
    uint32_t count = read_u32(in);
    for (uint32_t i = 0; i < count; i++) {
        uint32_t len = read_u32(in);
        std::string p(len, '\0');
        in.read(p.data(), len);
        b.subword.add_piece(p);
    }
    return b;
}

}  // namespace ketgpt::classifier
