#include "ketgpt/vocab.hpp"

#include <fstream>

#include <json.hpp>

namespace ketgpt::vocab {

const std::string& StatementVocab::text_of(int id) const {
    if (id < kNumSpecials || id >= size()) throw InvalidToken(id);
    return texts[id - kNumSpecials];
}

int StatementVocab::id_of(const std::string& text) const {
    auto it = ids.find(text);
    return it == ids.end() ? -1 : it->second;
}

StatementVocab build_vocab(const corpus::CorpusStats& stats) {
    StatementVocab v;
    v.texts = stats.unique_statements;
    for (size_t i = 0; i < v.texts.size(); i++)
        v.ids[v.texts[i]] = static_cast<int>(i) + StatementVocab::kNumSpecials;
    return v;
}

std::vector<int> encode(const qasm::Circuit& c, const StatementVocab& v) {
    std::vector<int> out{StatementVocab::BOS};
    for (const auto& s : c.statements) {
        switch (s.kind) {
            case qasm::StatementKind::GateApp:
            case qasm::StatementKind::Measure:
            case qasm::StatementKind::Barrier: {
                std::string text = s.text();
                int id = v.id_of(text);
                if (id < 0) throw UnknownStatement(text);
                out.push_back(id);
                break;
            }
            default:
                break;
        }
    }
    out.push_back(StatementVocab::EOS);
    return out;
}

std::vector<qasm::Statement> decode(const std::vector<int>& ids,
                                    const StatementVocab& v) {
    std::vector<qasm::Statement> out;
    for (int id : ids) {
        if (id < 0 || id >= v.size()) throw InvalidToken(id);
        if (id < StatementVocab::kNumSpecials) continue;
        out.push_back(qasm::parse_statement(v.text_of(id)));
    }
    return out;
}

void StatementVocab::save_json(const std::filesystem::path& path) const {
    nlohmann::json j;
    j["specials"] = {{"BOS", BOS}, {"EOS", EOS}, {"PAD", PAD}};
    j["statements"] = texts;
    std::ofstream out(path);
    out << j.dump(2) << '\n';
}

StatementVocab StatementVocab::load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    nlohmann::json j = nlohmann::json::parse(in);
    corpus::CorpusStats stats;
    stats.unique_statements = j.at("statements").get<std::vector<std::string>>();
    return build_vocab(stats);
}

}  // namespace ketgpt::vocab
