#pragma once

#include <random>

#include "ketgpt/corpus.hpp"
#include "ketgpt/qasm.hpp"
#include "ketgpt/vocab.hpp"

namespace ketgpt::random_gen {

// Baseline circuit: statements drawn uniformly from the vocabulary, matched to
// the corpus qubit/gate-count distributions, with no qubit masking. The header
// declares only qreg q[qubit_count], so out-of-range references can (and
// should) occur.
qasm::Circuit random_circuit(const vocab::StatementVocab& v,
                             const corpus::CorpusStats& stats, uint64_t seed);

}  // namespace ketgpt::random_gen
