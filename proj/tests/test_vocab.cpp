#include <doctest.h>

#include "ketgpt/corpus.hpp"
#include "ketgpt/vocab.hpp"

using namespace ketgpt;
using vocab::StatementVocab;

namespace {

corpus::CorpusStats fixture_stats() {
    corpus::CorpusStats s;
    s.unique_statements = {"h q[0];", "cx q[0],q[1];", "h q[1];"};
    s.qubit_counts = {2};
    s.gate_counts = {3};
    s.file_names = {"fixture"};
    return s;
}

qasm::Circuit bell() {
    return qasm::parse(
               "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[2];\nh "
               "q[0];\ncx q[0],q[1];")
        .circuit;
}

}  // namespace

TEST_CASE("build_vocab size and ordering") {
    auto v = vocab::build_vocab(fixture_stats());
    CHECK(v.size() == 6);  // 3 statements + 3 specials
    CHECK(v.id_of("h q[0];") == 3);
    CHECK(v.id_of("cx q[0],q[1];") == 4);
    CHECK(v.id_of("h q[1];") == 5);
    CHECK(v.id_of("h q[0];") != v.id_of("h q[1];"));
    CHECK(v.text_of(4) == "cx q[0],q[1];");
}

TEST_CASE("encode wraps body in BOS/EOS and skips non-body lines") {
    auto v = vocab::build_vocab(fixture_stats());
    CHECK(vocab::encode(bell(), v) == std::vector<int>{0, 3, 4, 1});

    auto empty = qasm::parse("OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[2];").circuit;
    CHECK(vocab::encode(empty, v) ==
          std::vector<int>{StatementVocab::BOS, StatementVocab::EOS});
}

TEST_CASE("encode raises on out-of-vocabulary statement") {
    auto v = vocab::build_vocab(fixture_stats());
    auto c = qasm::parse("OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[3];\nx q[2];").circuit;
    CHECK_THROWS_AS(vocab::encode(c, v), vocab::UnknownStatement);
}

TEST_CASE("decode inverts encode and drops specials") {
    auto v = vocab::build_vocab(fixture_stats());
    auto sts = vocab::decode({0, 3, 4, 1}, v);
    REQUIRE(sts.size() == 2);
    CHECK(sts[0].text() == "h q[0];");
    CHECK(sts[1].text() == "cx q[0],q[1];");
    CHECK(vocab::decode({0, 1}, v).empty());
}

TEST_CASE("decode rejects out-of-range ids") {
    auto v = vocab::build_vocab(fixture_stats());
    CHECK_THROWS_AS(vocab::decode({0, 999, 1}, v), vocab::InvalidToken);
}

TEST_CASE("bijection over the bundled corpus") {
    auto res = corpus::ingest(KETGPT_TEST_DATA_DIR "/corpus");
    auto v = vocab::build_vocab(res.stats);
    for (const auto& c : res.circuits) {
        auto ids = vocab::encode(c, v);
        auto sts = vocab::decode(ids, v);
        std::vector<std::string> body;
        for (const auto& s : c.statements)
            if (s.kind == qasm::StatementKind::GateApp ||
                s.kind == qasm::StatementKind::Measure ||
                s.kind == qasm::StatementKind::Barrier)
                body.push_back(s.text());
        REQUIRE(sts.size() == body.size());
        for (size_t i = 0; i < body.size(); i++) CHECK(sts[i].text() == body[i]);
    }
}

TEST_CASE("every vocab entry parses as a single body statement") {
    auto res = corpus::ingest(KETGPT_TEST_DATA_DIR "/corpus");
    auto v = vocab::build_vocab(res.stats);
    for (const auto& text : v.texts) {
        auto st = qasm::parse_statement(text);
        bool body = st.kind == qasm::StatementKind::GateApp ||
                    st.kind == qasm::StatementKind::Measure ||
                    st.kind == qasm::StatementKind::Barrier;
        CHECK(body);
    }
}

TEST_CASE("vocab json round-trip") {
    auto v = vocab::build_vocab(fixture_stats());
    auto path = std::filesystem::temp_directory_path() / "ketgpt_vocab.json";
    v.save_json(path);
    auto loaded = StatementVocab::load_json(path);
    CHECK(loaded.texts == v.texts);
    CHECK(loaded.size() == v.size());
}
