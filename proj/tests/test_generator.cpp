#include <doctest.h>

#include <cmath>
#include <map>

#include "ketgpt/generator.hpp"

using namespace ketgpt;
using generator::GenerationConstraints;
using vocab::StatementVocab;

namespace {

vocab::StatementVocab fixture_vocab(const std::vector<std::string>& statements) {
    corpus::CorpusStats s;
    s.unique_statements = statements;
    return vocab::build_vocab(s);
}

}  // namespace

TEST_CASE("build_prompt emits the three-line header") {
    CHECK(generator::build_prompt(5) ==
          "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[5];\n");
    CHECK(generator::build_prompt(1).ends_with("qreg q[1];\n"));
    CHECK(generator::build_prompt(100).ends_with("qreg q[100];\n"));
}

TEST_CASE("build_mask filters statements touching out-of-range qubits") {
    auto v = fixture_vocab({"h q[0];", "cx q[3],q[13];", "cx q[0],q[1];"});
    auto mask = generator::build_mask(v, 5);
    CHECK(mask[StatementVocab::EOS]);
    CHECK_FALSE(mask[StatementVocab::BOS]);
    CHECK_FALSE(mask[StatementVocab::PAD]);
    CHECK(mask[v.id_of("h q[0];")]);
    CHECK_FALSE(mask[v.id_of("cx q[3],q[13];")]);
    CHECK(mask[v.id_of("cx q[0],q[1];")]);
}

TEST_CASE("build_mask exhaustive scan at qubit_count 2") {
    std::vector<std::string> sts = {
        "h q[0];",  "h q[1];",       "h q[2];",       "x q[3];",
        "x q[4];",  "cx q[0],q[1];", "cx q[1],q[2];", "cz q[0],q[2];",
        "rz(pi/2) q[1];", "ccx q[0],q[1],q[4];"};
    auto v = fixture_vocab(sts);
    auto mask = generator::build_mask(v, 2);
    for (const auto& text : sts) {
        qasm::Statement st = qasm::parse_statement(text);
        bool expect = true;
        for (const auto& op : st.qubits) expect = expect && op.index < 2;
        CHECK(mask[v.id_of(text)] == expect);
    }
}

TEST_CASE("top-k renormalized draw frequencies match closed form") {
    // post-mask probabilities {a:0.4, b:0.3, c:0.1, d:0.1, e:0.05, f:0.05}
    std::vector<double> probs{0.4, 0.3, 0.1, 0.1, 0.05, 0.05};
    std::vector<double> logits;
    for (double p : probs) logits.push_back(std::log(p));
    GenerationConstraints cons;
    cons.top_k = 5;
    cons.no_repeat_window = 15;
    cons.allowed_mask.assign(6, true);

    std::mt19937_64 rng(404);
    std::map<int, int> counts;
    const int n = 100000;
    for (int i = 0; i < n; i++)
        counts[generator::top_k_sample(logits, cons, {}, rng)]++;

    CHECK(counts[5] == 0);  // f is cut by top-5
    for (int t = 0; t < 5; t++) {
        double expect = probs[t] / 0.95;
        CHECK(std::abs(counts[t] / static_cast<double>(n) - expect) < 0.01);
    }
}

TEST_CASE("top-k degenerates to all allowed tokens when k is large") {
    std::vector<double> logits{0.0, 0.0, 0.0};
    GenerationConstraints cons;
    cons.top_k = 50;
    cons.allowed_mask.assign(3, true);
    std::mt19937_64 rng(1);
    std::map<int, int> counts;
    for (int i = 0; i < 3000; i++)
        counts[generator::top_k_sample(logits, cons, {}, rng)]++;
    for (int t = 0; t < 3; t++) CHECK(counts[t] > 800);
}

TEST_CASE("no-repeat window blocks the completing token") {
    // window 3: history [5,6,7,5,6] -> the 3-gram (5,6,7) exists, so after
    // the trailing (5,6) token 7 must be excluded even with dominant logits.
    GenerationConstraints cons;
    cons.top_k = 5;
    cons.no_repeat_window = 3;
    cons.allowed_mask.assign(9, true);
    std::vector<double> logits(9, 0.0);
    logits[7] = 50.0;
    std::vector<int> history{5, 6, 7, 5, 6};
    std::mt19937_64 rng(12);
    for (int i = 0; i < 200; i++)
        CHECK(generator::top_k_sample(logits, cons, history, rng) != 7);
}

TEST_CASE("Exhausted when every token is disallowed") {
    GenerationConstraints cons;
    cons.top_k = 5;
    cons.allowed_mask.assign(4, false);
    std::mt19937_64 rng(3);
    CHECK_THROWS_AS(
        generator::top_k_sample({0.0, 0.0, 0.0, 0.0}, cons, {}, rng),
        generator::Exhausted);
}

TEST_CASE("post_process grows registers to cover referenced indices") {
    std::vector<qasm::Statement> body{qasm::parse_statement("h q[7];")};
    auto c = generator::post_process(body, 5);
    CHECK(c.qreg_sizes.at("q") == 8);
    CHECK(qasm::validate(c).ok());
}

TEST_CASE("post_process declares classical registers for measures") {
    std::vector<qasm::Statement> body{
        qasm::parse_statement("h q[0];"),
        qasm::parse_statement("measure q[0] -> c[2];")};
    auto c = generator::post_process(body, 3);
    CHECK(c.creg_sizes.at("c") == 3);
    CHECK(qasm::validate(c).ok());
}

TEST_CASE("post_process on empty body yields header-only circuit") {
    auto c = generator::post_process({}, 4);
    CHECK(c.statements.size() == 3);
    CHECK(c.qreg_sizes.at("q") == 4);
    CHECK(c.creg_sizes.empty());
    CHECK(qasm::validate(c).ok());
    CHECK(qasm::gate_count(c) == 0);
}

TEST_CASE("generation from a memorizing model reproduces the training body") {
    // one body, one (q, g) pair: sample_target is forced onto the memorized
    // circuit and greedy-ish top-k follows it
    std::vector<std::string> body = {"h q[0];", "h q[1];", "cx q[0],q[1];",
                                     "cz q[1],q[2];"};
    corpus::CorpusStats stats;
    stats.unique_statements = body;
    stats.qubit_counts = {3};
    stats.gate_counts = {4};
    stats.file_names = {"train"};
    auto v = vocab::build_vocab(stats);

    nn::ModelConfig cfg;
    cfg.n_embd = 16;
    cfg.n_layer = 1;
    cfg.n_head = 2;
    cfg.n_positions = 16;
    cfg.vocab_size = v.size();
    auto model = nn::TransformerModel::init(cfg, 10);
    nn::AdamWState adam = nn::AdamWState::init(model);
    nn::TrainConfig tc;
    tc.learning_rate = 1e-2;
    std::vector<int> seq{0, 3, 4, 5, 6, 1};
    for (int step = 0; step < 300; step++)
        nn::train_step_lm(model, {seq}, StatementVocab::PAD, adam, tc);

    auto rec = generator::generate(model, v, stats, 77);
    CHECK(rec.qubit_count == 3);
    CHECK(rec.target_gates == 4);
    REQUIRE(rec.circuit.statements.size() >= 3 + body.size());
    for (size_t i = 0; i < body.size(); i++)
        CHECK(rec.circuit.statements[rec.circuit.statements.size() - body.size() + i]
                  .text() == body[i]);
    CHECK(qasm::validate(rec.circuit).ok());
}

TEST_CASE("generation determinism: same seed, byte-identical file") {
    auto ingest = corpus::ingest(KETGPT_TEST_DATA_DIR "/corpus");
    auto v = vocab::build_vocab(ingest.stats);
    nn::ModelConfig cfg;
    cfg.n_embd = 16;
    cfg.n_layer = 1;
    cfg.n_head = 2;
    cfg.n_positions = 64;
    cfg.vocab_size = v.size();
    auto model = nn::TransformerModel::init(cfg, 6);

    auto a = generator::generate(model, v, ingest.stats, 123);
    auto b = generator::generate(model, v, ingest.stats, 123);
    CHECK(qasm::serialize(a.circuit) == qasm::serialize(b.circuit));
}

TEST_CASE("target_gates 0 yields a header-only valid circuit") {
    corpus::CorpusStats stats;
    stats.unique_statements = {"h q[0];"};
    stats.qubit_counts = {2};
    stats.gate_counts = {0};
    stats.file_names = {"empty"};
    auto v = vocab::build_vocab(stats);
    nn::ModelConfig cfg;
    cfg.n_embd = 8;
    cfg.n_layer = 1;
    cfg.n_head = 1;
    cfg.n_positions = 8;
    cfg.vocab_size = v.size();
    auto model = nn::TransformerModel::init(cfg, 2);
    auto rec = generator::generate(model, v, stats, 5);
    CHECK(rec.achieved_gates == 0);
    CHECK(qasm::gate_count(rec.circuit) == 0);
    CHECK(qasm::validate(rec.circuit).ok());
}

TEST_CASE("generator bundle round-trips through its checkpoint") {
    auto ingest = corpus::ingest(KETGPT_TEST_DATA_DIR "/corpus");
    generator::GeneratorBundle bundle;
    bundle.vocab = vocab::build_vocab(ingest.stats);
    bundle.stats = ingest.stats;
    nn::ModelConfig cfg;
    cfg.n_embd = 8;
    cfg.n_layer = 1;
    cfg.n_head = 1;
    cfg.n_positions = 32;
    cfg.vocab_size = bundle.vocab.size();
    bundle.model = nn::TransformerModel::init(cfg, 9);

    auto path = std::filesystem::temp_directory_path() / "ketgpt_gen.ckpt";
    bundle.save(path);
    auto loaded = generator::GeneratorBundle::load(path);
    CHECK(loaded.model == bundle.model);
    CHECK(loaded.vocab.texts == bundle.vocab.texts);
    CHECK(loaded.stats.qubit_counts == bundle.stats.qubit_counts);
    CHECK(loaded.stats.gate_counts == bundle.stats.gate_counts);
    std::filesystem::remove(path);
}
