#include <doctest.h>

#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <set>

#include "ketgpt/structure.hpp"

using namespace ketgpt;
using namespace ketgpt::structure;

namespace {

qasm::Circuit circuit_of(int qubits, const std::vector<std::string>& body,
                         int cbits = 0) {
    std::string text = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[" +
                       std::to_string(qubits) + "];\n";
    if (cbits > 0) text += "creg c[" + std::to_string(cbits) + "];\n";
    for (const auto& s : body) text += s + "\n";
    return qasm::parse(text).circuit;
}

// Independent brute-force metric oracle: straight-line interpreter over a
// dense adjacency matrix plus recursive longest-path search. No shared code
// with extract_metrics beyond the parser.
CircuitMetrics oracle_metrics(const qasm::Circuit& c) {
    int nq = 0;
    for (const auto& [_, sz] : c.qreg_sizes) nq += sz;
    std::map<std::string, int> offset;
    {
        int off = 0;
        for (const auto& [name, sz] : c.qreg_sizes) { offset[name] = off; off += sz; }
    }

    struct Node { std::vector<int> qubits; bool two_q; bool is_measure; };
    std::vector<Node> nodes;
    for (const auto& s : c.statements) {
        bool gate = s.kind == qasm::StatementKind::GateApp;
        bool meas = s.kind == qasm::StatementKind::Measure;
        if (!gate && !meas) continue;
        Node n;
        for (const auto& op : s.qubits) n.qubits.push_back(offset[op.reg] + op.index);
        n.two_q = gate && s.qubits.size() == 2;
        n.is_measure = meas;
        nodes.push_back(n);
    }
    const int g = static_cast<int>(nodes.size());

    // interaction adjacency (dense)
    std::vector<std::vector<int>> w(nq, std::vector<int>(nq, 0));
    for (const auto& n : nodes) {
        if (n.is_measure) continue;
        for (size_t a = 0; a < n.qubits.size(); a++)
            for (size_t b = a + 1; b < n.qubits.size(); b++)
                if (n.qubits[a] != n.qubits[b]) {
                    w[n.qubits[a]][n.qubits[b]]++;
                    w[n.qubits[b]][n.qubits[a]]++;
                }
    }

    // dependency edges via per-qubit chaining
    std::set<std::pair<int, int>> dep;
    std::vector<int> last(nq, -1);
    for (int i = 0; i < g; i++)
        for (int q : nodes[i].qubits) {
            if (last[q] >= 0) dep.insert({last[q], i});
            last[q] = i;
        }

    // longest path by recursive DFS (exponential-safe only for tiny circuits)
    std::vector<std::vector<int>> succ(g);
    for (const auto& [a, b] : dep) succ[a].push_back(b);
    std::function<int(int)> longest = [&](int v) {
        int best = 1;
        for (int s : succ[v]) best = std::max(best, 1 + longest(s));
        return best;
    };
    int depth = 0;
    for (int v = 0; v < g; v++) depth = std::max(depth, longest(v));

    int edge_count = 0, deg_sum = 0, max_deg = 0, min_deg = nq > 0 ? 1 << 30 : 0;
    std::vector<int> deg(nq, 0);
    for (int a = 0; a < nq; a++) {
        for (int b = 0; b < nq; b++)
            if (w[a][b] > 0) deg[a]++;
        deg_sum += deg[a];
        max_deg = std::max(max_deg, deg[a]);
        min_deg = std::min(min_deg, deg[a]);
        for (int b = a + 1; b < nq; b++)
            if (w[a][b] > 0) edge_count++;
    }
    double mean_deg = nq ? deg_sum / static_cast<double>(nq) : 0.0;
    double var = 0.0;
    for (int a = 0; a < nq; a++) var += (deg[a] - mean_deg) * (deg[a] - mean_deg);
    double sd = nq ? std::sqrt(var / nq) : 0.0;

    // triplets centered at v, triangles by ordered triple scan
    long tri = 0, trip = 0;
    for (int v = 0; v < nq; v++) {
        long d = deg[v];
        trip += d * (d - 1) / 2;
    }
    for (int a = 0; a < nq; a++)
        for (int b = a + 1; b < nq; b++)
            for (int cq = b + 1; cq < nq; cq++)
                if (w[a][b] > 0 && w[b][cq] > 0 && w[a][cq] > 0) tri++;

    // components by repeated sweep
    std::vector<int> comp(nq, -1);
    int comps = 0;
    for (int v = 0; v < nq; v++) {
        if (comp[v] >= 0) continue;
        comp[v] = comps;
        bool changed = true;
        while (changed) {
            changed = false;
            for (int a = 0; a < nq; a++)
                for (int b = 0; b < nq; b++)
                    if (w[a][b] > 0 && comp[a] == comps && comp[b] < 0) {
                        comp[b] = comps;
                        changed = true;
                    }
        }
        comps++;
    }

    int two_q = 0, meas = 0;
    for (const auto& n : nodes) {
        if (n.two_q) two_q++;
        if (n.is_measure) meas++;
    }

    CircuitMetrics m{};
    m[0] = nq;
    m[1] = g;
    m[2] = depth;
    m[3] = g ? two_q / static_cast<double>(g) : 0.0;
    m[4] = g ? meas / static_cast<double>(g) : 0.0;
    m[5] = edge_count;
    m[6] = nq >= 2 ? edge_count / (nq * (nq - 1) / 2.0) : 0.0;
    m[7] = max_deg;
    m[8] = nq ? min_deg : 0;
    m[9] = mean_deg;
    m[10] = sd;
    m[11] = trip > 0 ? 3.0 * tri / trip : 0.0;
    m[12] = comps;
    m[13] = depth > 0 ? depth - 1 : 0;
    m[14] = g ? dep.size() / static_cast<double>(g) : 0.0;
    m[15] = depth > 0 ? g / static_cast<double>(depth) : 0.0;
    return m;
}

// Adjusted Rand index between two labelings.
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    std::map<std::pair<int, int>, long> cont;
    std::map<int, long> ra, rb;
    const long n = static_cast<long>(a.size());
    for (size_t i = 0; i < a.size(); i++) {
        cont[{a[i], b[i]}]++;
        ra[a[i]]++;
        rb[b[i]]++;
    }
    auto c2 = [](long x) { return x * (x - 1) / 2.0; };
    double sum_ij = 0, sum_a = 0, sum_b = 0;
    for (const auto& [_, v] : cont) sum_ij += c2(v);
    for (const auto& [_, v] : ra) sum_a += c2(v);
    for (const auto& [_, v] : rb) sum_b += c2(v);
    double expect = sum_a * sum_b / c2(n);
    double max_idx = 0.5 * (sum_a + sum_b);
    if (max_idx == expect) return 1.0;
    return (sum_ij - expect) / (max_idx - expect);
}

}  // namespace

TEST_CASE("interaction graph from a cx chain") {
    auto c = circuit_of(3, {"cx q[0],q[1];", "cx q[1],q[2];"});
    auto g = interaction_graph(c);
    CHECK(g.edges.size() == 2);
    CHECK(g.edges.at({0, 1}) == 1);
    CHECK(g.edges.at({1, 2}) == 1);
    CHECK(g.degrees() == std::vector<int>{1, 2, 1});
}

TEST_CASE("single-qubit-only circuit has no interaction edges") {
    auto c = circuit_of(2, {"h q[0];", "x q[1];"});
    CHECK(interaction_graph(c).edges.empty());
}

TEST_CASE("ccx expands to all three pairwise edges") {
    auto c = circuit_of(3, {"ccx q[0],q[1],q[2];"});
    auto g = interaction_graph(c);
    CHECK(g.edges.size() == 3);
    for (auto [a, b] : {std::pair{0, 1}, {0, 2}, {1, 2}})
        CHECK(g.edges.at({a, b}) == 1);
}

TEST_CASE("dependency graph edges follow shared qubits") {
    auto c = circuit_of(2, {"h q[0];", "cx q[0],q[1];"});
    auto g = dependency_graph(c);
    REQUIRE(g.num_gates == 2);
    CHECK(g.out_edges[0] == std::vector<int>{1});
    CHECK(g.depth() == 2);

    auto disjoint = circuit_of(2, {"h q[0];", "h q[1];"});
    auto gd = dependency_graph(disjoint);
    CHECK(gd.out_edges[0].empty());
    CHECK(gd.depth() == 1);
}

TEST_CASE("serial chain depth") {
    auto c = circuit_of(1, {"h q[0];", "h q[0];", "h q[0];"});
    CHECK(dependency_graph(c).depth() == 3);
}

TEST_CASE("dependency graph is acyclic (edges point forward)") {
    auto c = circuit_of(4, {"h q[0];", "cx q[0],q[1];", "cx q[1],q[2];",
                            "ccx q[0],q[2],q[3];", "h q[1];"});
    auto g = dependency_graph(c);
    for (int i = 0; i < g.num_gates; i++)
        for (int j : g.out_edges[i]) CHECK(j > i);
}

TEST_CASE("Bell circuit metrics by hand") {
    auto c = circuit_of(2,
                        {"h q[0];", "cx q[0],q[1];", "measure q[0] -> c[0];",
                         "measure q[1] -> c[1];"},
                        2);
    auto m = extract_metrics(c);
    CHECK(m[0] == 2);      // qubits
    CHECK(m[1] == 4);      // gates
    CHECK(m[3] == doctest::Approx(0.25));  // two-qubit fraction
    CHECK(m[4] == doctest::Approx(0.5));   // measure fraction
    CHECK(m[2] == 3);      // h -> cx -> measure
    CHECK(m[5] == 1);
}

TEST_CASE("empty body gives zero metrics except qubit count") {
    auto c = circuit_of(5, {});
    auto m = extract_metrics(c);
    CHECK(m[0] == 5);
    for (int i = 1; i < kNumMetrics; i++)
        if (i != 12)  // 5 isolated qubits are 5 components
            CHECK(m[i] == 0.0);
    CHECK(m[12] == 5);
}

TEST_CASE("metrics agree with the brute-force oracle on ten circuits") {
    std::vector<qasm::Circuit> fixtures = {
        circuit_of(2, {"h q[0];", "cx q[0],q[1];"}),
        circuit_of(3, {"ccx q[0],q[1],q[2];", "h q[0];"}),
        circuit_of(1, {"h q[0];", "h q[0];", "h q[0];"}),
        circuit_of(4, {"cx q[0],q[1];", "cx q[2],q[3];"}),
        circuit_of(3, {"cx q[0],q[1];", "cx q[1],q[2];", "cz q[0],q[2];"}),
        circuit_of(2, {"h q[0];", "cx q[0],q[1];", "measure q[0] -> c[0];"}, 1),
        circuit_of(5, {}),
        circuit_of(3, {"swap q[0],q[1];", "swap q[0],q[1];", "barrier q[0],q[2];"}),
        circuit_of(4, {"h q[0];", "h q[1];", "h q[2];", "h q[3];",
                       "cx q[0],q[1];", "cx q[1],q[2];", "cx q[2],q[3];",
                       "measure q[3] -> c[0];"}, 1),
        circuit_of(6, {"ccx q[0],q[1],q[2];", "ccx q[3],q[4],q[5];",
                       "cx q[2],q[3];", "rz(pi/4) q[0];"}),
    };
    for (size_t i = 0; i < fixtures.size(); i++) {
        auto got = extract_metrics(fixtures[i]);
        auto want = oracle_metrics(fixtures[i]);
        for (int j = 0; j < kNumMetrics; j++) {
            INFO("fixture ", i, " metric ", kMetricNames[j]);
            CHECK(std::abs(got[j] - want[j]) < 1e-9);
        }
    }
}

TEST_CASE("depth matches an independent DFS oracle on corpus-like circuits") {
    auto c = circuit_of(4, {"h q[0];", "h q[1];", "cx q[0],q[1];",
                            "cx q[1],q[2];", "ccx q[0],q[2],q[3];",
                            "measure q[3] -> c[0];"}, 1);
    CHECK(extract_metrics(c)[2] == oracle_metrics(c)[2]);
}

TEST_CASE("planted two-blob clustering is recovered exactly") {
    std::vector<MetricRow> rows;
    std::vector<int> truth;
    std::mt19937_64 rng(17);
    std::normal_distribution<double> noise(0.0, 0.05);
    for (int i = 0; i < 40; i++) {
        MetricRow r;
        r.source = Source::Real;
        r.name = "p" + std::to_string(i);
        r.metrics.fill(0.0);
        int blob = i % 2;
        truth.push_back(blob);
        r.metrics[0] = 5.0;  // same size band for everyone
        r.metrics[1] = blob ? 10.0 + noise(rng) : -10.0 + noise(rng);
        r.metrics[2] = blob ? 8.0 + noise(rng) : -8.0 + noise(rng);
        rows.push_back(r);
    }
    auto rep = cluster(rows, 2, 99);
    std::vector<int> got;
    for (const auto& a : rep.assignments) got.push_back(a.cluster);
    CHECK(adjusted_rand_index(got, truth) == doctest::Approx(1.0));
}

TEST_CASE("identical metric vectors collapse to one cluster per bucket") {
    std::vector<MetricRow> rows;
    for (int i = 0; i < 10; i++) {
        MetricRow r;
        r.source = Source::Random;
        r.name = "same" + std::to_string(i);
        r.metrics.fill(3.0);
        rows.push_back(r);
    }
    auto rep = cluster(rows, 4, 1);
    std::set<int> ids;
    for (const auto& a : rep.assignments) ids.insert(a.cluster);
    CHECK(ids.size() == 1);
}

TEST_CASE("degenerate bucket reduces k with a warning") {
    std::vector<MetricRow> rows;
    for (int i = 0; i < 3; i++) {
        MetricRow r;
        r.source = Source::KetGpt;
        r.name = "x" + std::to_string(i);
        r.metrics.fill(0.0);
        r.metrics[0] = 4;
        r.metrics[1] = i;
        rows.push_back(r);
    }
    auto rep = cluster(rows, 6, 2);
    CHECK(!rep.warnings.empty());
}

TEST_CASE("clustering is deterministic given seed") {
    std::vector<MetricRow> rows;
    std::mt19937_64 rng(8);
    std::normal_distribution<double> d(0.0, 1.0);
    for (int i = 0; i < 30; i++) {
        MetricRow r;
        r.source = static_cast<Source>(i % 3);
        r.name = "c" + std::to_string(i);
        for (auto& v : r.metrics) v = d(rng);
        r.metrics[0] = 2 + i % 7;
        rows.push_back(r);
    }
    auto a = cluster(rows, 3, 12345);
    auto b = cluster(rows, 3, 12345);
    REQUIRE(a.assignments.size() == b.assignments.size());
    for (size_t i = 0; i < a.assignments.size(); i++) {
        CHECK(a.assignments[i].size_bucket == b.assignments[i].size_bucket);
        CHECK(a.assignments[i].cluster == b.assignments[i].cluster);
    }
    CHECK(a.composition == b.composition);
}

TEST_CASE("composition counts sum to input size") {
    std::vector<MetricRow> rows;
    std::mt19937_64 rng(4);
    std::normal_distribution<double> d(0.0, 1.0);
    for (int i = 0; i < 25; i++) {
        MetricRow r;
        r.source = static_cast<Source>(i % 3);
        r.name = "r" + std::to_string(i);
        for (auto& v : r.metrics) v = d(rng);
        r.metrics[0] = 2 + i % 5;
        rows.push_back(r);
    }
    auto rep = cluster(rows, 2, 6);
    int total = 0;
    for (const auto& [_, counts] : rep.composition)
        total += counts[0] + counts[1] + counts[2];
    CHECK(total == 25);
}

TEST_CASE("dot output lists nodes and weighted edges") {
    auto c = circuit_of(3, {"cx q[0],q[1];", "cx q[0],q[1];"});
    auto dot = interaction_dot(interaction_graph(c));
    CHECK(dot.find("q0 -- q1 [label=2]") != std::string::npos);
    CHECK(dot.find("q2;") != std::string::npos);
}
