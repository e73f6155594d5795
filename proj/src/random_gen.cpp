#include "ketgpt/random_gen.hpp"

namespace ketgpt::random_gen {

using vocab::StatementVocab;

qasm::Circuit random_circuit(const StatementVocab& v,
                             const corpus::CorpusStats& stats, uint64_t seed) {
    if (v.texts.empty()) throw std::invalid_argument("empty vocabulary");
    std::mt19937_64 rng(seed);
    auto [qubits, gates] = corpus::sample_target(stats, rng);

    qasm::Circuit c;
    qasm::Statement header, include, qreg;
    header.kind = qasm::StatementKind::Header;
    include.kind = qasm::StatementKind::Include;
    qreg.kind = qasm::StatementKind::QregDecl;
    qreg.reg_name = "q";
    qreg.reg_size = qubits;
    c.statements = {header, include, qreg};
    c.qreg_sizes["q"] = qubits;

    std::uniform_int_distribution<size_t> pick(0, v.texts.size() - 1);
    for (int i = 0; i < gates; i++)
        c.statements.push_back(qasm::parse_statement(v.texts[pick(rng)]));
    return c;
}

}  // namespace ketgpt::random_gen
