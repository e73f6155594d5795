#include "ketgpt/structure.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <set>

#include <json.hpp>

namespace ketgpt::structure {

using qasm::Circuit;
using qasm::StatementKind;

namespace {

// Flattens (register, index) into a global qubit index; registers in sorted
// name order, matching Circuit::total_qubits.
std::map<std::string, int> register_offsets(const Circuit& c) {
    std::map<std::string, int> offsets;
    int off = 0;
    for (const auto& [name, sz] : c.qreg_sizes) {
        offsets[name] = off;
        off += sz;
    }
    return offsets;
}

bool is_dag_node(const qasm::Statement& s) {
    return s.kind == StatementKind::GateApp || s.kind == StatementKind::Measure;
}

std::vector<int> global_qubits(const qasm::Statement& s,
                               const std::map<std::string, int>& offsets) {
    std::vector<int> out;
    for (const auto& op : s.qubits) {
        auto it = offsets.find(op.reg);
        if (it != offsets.end()) out.push_back(it->second + op.index);
    }
    return out;
}

}  // namespace

std::vector<int> InteractionGraph::degrees() const {
    std::vector<int> deg(num_qubits, 0);
    for (const auto& [pair, _] : edges) {
        deg[pair.first]++;
        deg[pair.second]++;
    }
    return deg;
}

InteractionGraph interaction_graph(const Circuit& c) {
    InteractionGraph g;
    g.num_qubits = c.total_qubits();
    auto offsets = register_offsets(c);
    for (const auto& s : c.statements) {
        if (s.kind != StatementKind::GateApp) continue;
        std::vector<int> qs = global_qubits(s, offsets);
        // circuits that fail validation may reference indices beyond the
        // declared size; widen so the graph stays indexable
        for (int q : qs) g.num_qubits = std::max(g.num_qubits, q + 1);
        for (size_t a = 0; a < qs.size(); a++)
            for (size_t b = a + 1; b < qs.size(); b++) {
                int lo = std::min(qs[a], qs[b]), hi = std::max(qs[a], qs[b]);
                if (lo != hi) g.edges[{lo, hi}]++;
            }
    }
    return g;
}

int GateDependencyGraph::depth() const {
    // Nodes are in statement order, so edges always point forward.
    std::vector<int> longest(num_gates, 1);
    int best = num_gates > 0 ? 1 : 0;
    for (int i = 0; i < num_gates; i++)
        for (int j : out_edges[i]) {
            longest[j] = std::max(longest[j], longest[i] + 1);
            best = std::max(best, longest[j]);
        }
    return best;
}

GateDependencyGraph dependency_graph(const Circuit& c) {
    GateDependencyGraph g;
    auto offsets = register_offsets(c);
    std::map<int, int> last_on_qubit;  // global qubit -> node index
    for (const auto& s : c.statements) {
        if (!is_dag_node(s)) continue;
        int node = g.num_gates++;
        g.out_edges.emplace_back();
        std::set<int> preds;
        for (int q : global_qubits(s, offsets)) {
            auto it = last_on_qubit.find(q);
            if (it != last_on_qubit.end()) preds.insert(it->second);
            last_on_qubit[q] = node;
        }
        for (int p : preds) g.out_edges[p].push_back(node);
    }
    return g;
}

CircuitMetrics extract_metrics(const Circuit& c) {
    CircuitMetrics m{};
    const int gates = qasm::gate_count(c);
    InteractionGraph ig = interaction_graph(c);
    const int nq = ig.num_qubits;  // == total_qubits() for valid circuits
    GateDependencyGraph dg = dependency_graph(c);

    int two_qubit = 0, measures = 0;
    for (const auto& s : c.statements) {
        if (s.kind == StatementKind::GateApp && s.qubits.size() == 2) two_qubit++;
        if (s.kind == StatementKind::Measure) measures++;
    }

    std::vector<int> deg = ig.degrees();
    double mean_deg = 0.0, sd = 0.0;
    int max_deg = 0, min_deg = 0;
    if (nq > 0) {
        max_deg = *std::max_element(deg.begin(), deg.end());
        min_deg = *std::min_element(deg.begin(), deg.end());
        mean_deg = std::accumulate(deg.begin(), deg.end(), 0.0) / nq;
        for (int d : deg) sd += (d - mean_deg) * (d - mean_deg);
        sd = std::sqrt(sd / nq);
    }

    // Global clustering coefficient: 3 * triangles / open-or-closed triplets.
    std::vector<std::set<int>> adj(nq);
    for (const auto& [pair, _] : ig.edges) {
        adj[pair.first].insert(pair.second);
        adj[pair.second].insert(pair.first);
    }
    long triangles = 0, triplets = 0;
    for (int v = 0; v < nq; v++) {
        long d = static_cast<long>(adj[v].size());
        triplets += d * (d - 1) / 2;
        for (int a : adj[v])
            for (int b : adj[v])
                if (a < b && adj[a].contains(b)) triangles++;
    }
    // `triangles` counts each triangle once per apex vertex, which is exactly
    // the 3x factor the global coefficient needs.
    double clustering = triplets > 0 ? static_cast<double>(triangles) / triplets : 0.0;

    // Connected components over all declared qubits.
    std::vector<int> comp(nq, -1);
    int components = 0;
    for (int v = 0; v < nq; v++) {
        if (comp[v] != -1) continue;
        components++;
        std::vector<int> stack{v};
        comp[v] = components;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (int w : adj[u])
                if (comp[w] == -1) {
                    comp[w] = components;
                    stack.push_back(w);
                }
        }
    }

    long dep_edges = 0;
    for (const auto& e : dg.out_edges) dep_edges += static_cast<long>(e.size());
    int depth = dg.depth();

    m[0] = nq;
    m[1] = gates;
    m[2] = depth;
    m[3] = gates > 0 ? static_cast<double>(two_qubit) / gates : 0.0;
    m[4] = gates > 0 ? static_cast<double>(measures) / gates : 0.0;
    m[5] = static_cast<double>(ig.edges.size());
    m[6] = nq >= 2 ? m[5] / (0.5 * nq * (nq - 1)) : 0.0;
    m[7] = max_deg;
    m[8] = min_deg;
    m[9] = mean_deg;
    m[10] = sd;
    m[11] = clustering;
    m[12] = components;
    m[13] = depth > 0 ? depth - 1 : 0;
    m[14] = dg.num_gates > 0 ? static_cast<double>(dep_edges) / dg.num_gates : 0.0;
    m[15] = depth > 0 ? static_cast<double>(gates) / depth : 0.0;
    return m;
}

const char* source_name(Source s) {
    switch (s) {
        case Source::Real:   return "real";
        case Source::Random: return "random";
        case Source::KetGpt: return "ketgpt";
    }
    return "?";
}

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (size_t i = 0; i < a.size(); i++) d += (a[i] - b[i]) * (a[i] - b[i]);
    return d;
}

// Lloyd's k-means with farthest-point init over z-scored features.
std::vector<int> kmeans(const std::vector<std::vector<double>>& points, int k,
                        std::mt19937_64& rng) {
    const int n = static_cast<int>(points.size());
    if (k <= 1 || n <= 1) return std::vector<int>(n, 0);

    std::vector<std::vector<double>> centers;
    std::uniform_int_distribution<int> pick(0, n - 1);
    centers.push_back(points[pick(rng)]);
    while (static_cast<int>(centers.size()) < k) {
        int far = 0;
        double far_d = -1.0;
        for (int i = 0; i < n; i++) {
            double nearest = std::numeric_limits<double>::infinity();
            for (const auto& c : centers) nearest = std::min(nearest, sq_dist(points[i], c));
            if (nearest > far_d) { far_d = nearest; far = i; }
        }
        centers.push_back(points[far]);
    }

    std::vector<int> assign(n, 0);
    for (int iter = 0; iter < 300; iter++) {
        for (int i = 0; i < n; i++) {
            double best = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; c++) {
                double d = sq_dist(points[i], centers[c]);
                if (d < best) { best = d; assign[i] = c; }
            }
        }
        std::vector<std::vector<double>> next(k, std::vector<double>(points[0].size(), 0.0));
        std::vector<int> counts(k, 0);
        for (int i = 0; i < n; i++) {
            counts[assign[i]]++;
            for (size_t j = 0; j < points[i].size(); j++)
                next[assign[i]][j] += points[i][j];
        }
        for (int c = 0; c < k; c++) {
            if (counts[c] == 0) {
                // re-seed an empty cluster at the point farthest from its center
                int far = 0;
                double far_d = -1.0;
                for (int i = 0; i < n; i++) {
                    double d = sq_dist(points[i], centers[assign[i]]);
                    if (d > far_d) { far_d = d; far = i; }
                }
                next[c] = points[far];
                counts[c] = 1;
                assign[far] = c;
            } else {
                for (double& v : next[c]) v /= counts[c];
            }
        }
        double moved = 0.0;
        for (int c = 0; c < k; c++) moved += sq_dist(centers[c], next[c]);
        centers = std::move(next);
        if (moved < 1e-6) break;
    }
    return assign;
}

}  // namespace

ClusterReport cluster(const std::vector<MetricRow>& rows, int k_structure,
                      uint64_t seed) {
    if (rows.size() < 2)
        throw std::invalid_argument("clustering needs at least 2 circuits");
    ClusterReport rep;
    rep.assignments.resize(rows.size());

    std::vector<double> nq(rows.size());
    for (size_t i = 0; i < rows.size(); i++) nq[i] = rows[i].metrics[0];
    std::vector<double> sorted_nq = nq;
    std::sort(sorted_nq.begin(), sorted_nq.end());
    auto percentile = [&](double p) {
        size_t idx = static_cast<size_t>(p * (sorted_nq.size() - 1));
        return sorted_nq[idx];
    };
    const double q33 = percentile(0.33), q67 = percentile(0.67);

    std::vector<std::vector<size_t>> buckets(3);
    for (size_t i = 0; i < rows.size(); i++) {
        int b = nq[i] <= q33 ? 0 : (nq[i] <= q67 ? 1 : 2);
        buckets[b].push_back(i);
        rep.assignments[i] = {rows[i].name, rows[i].source, b, 0};
    }

    std::mt19937_64 rng(seed);
    for (int b = 0; b < 3; b++) {
        const auto& members = buckets[b];
        if (members.empty()) continue;
        int k = k_structure;
        if (static_cast<int>(members.size()) < k) {
            k = static_cast<int>(members.size());
            rep.warnings.push_back("bucket " + std::to_string(b) + " has only " +
                                   std::to_string(members.size()) +
                                   " circuits; k reduced to " + std::to_string(k));
        }

        // z-score per bucket; constant features dropped
        std::vector<int> keep;
        std::array<double, kNumMetrics> mean{}, sd{};
        for (int j = 0; j < kNumMetrics; j++) {
            for (size_t i : members) mean[j] += rows[i].metrics[j];
            mean[j] /= members.size();
            for (size_t i : members) {
                double d = rows[i].metrics[j] - mean[j];
                sd[j] += d * d;
            }
            sd[j] = std::sqrt(sd[j] / members.size());
            if (sd[j] > 1e-12) keep.push_back(j);
        }

        std::vector<int> assign;
        if (keep.empty()) {
            assign.assign(members.size(), 0);
        } else {
            std::vector<std::vector<double>> points;
            for (size_t i : members) {
                std::vector<double> p;
                for (int j : keep) p.push_back((rows[i].metrics[j] - mean[j]) / sd[j]);
                points.push_back(std::move(p));
            }
            assign = kmeans(points, k, rng);
        }
        for (size_t t = 0; t < members.size(); t++)
            rep.assignments[members[t]].cluster = assign[t];
    }

    for (const auto& a : rep.assignments)
        rep.composition[{a.size_bucket, a.cluster}][static_cast<int>(a.source)]++;
    rep.total_clusters = static_cast<int>(rep.composition.size());
    return rep;
}

void write_metrics_csv(const std::filesystem::path& path,
                       const std::vector<MetricRow>& rows) {
    std::ofstream out(path);
    out << std::setprecision(17);  // lossless double round-trip for `cluster`
    out << "source,filename";
    for (const char* n : kMetricNames) out << ',' << n;
    out << '\n';
    for (const auto& r : rows) {
        out << source_name(r.source) << ',' << r.name;
        for (double v : r.metrics) out << ',' << v;
        out << '\n';
    }
}

void write_clusters_csv(const std::filesystem::path& path,
                        const ClusterReport& report) {
    std::ofstream out(path);
    out << "filename,source,size_bucket,cluster\n";
    for (const auto& a : report.assignments)
        out << a.name << ',' << source_name(a.source) << ',' << a.size_bucket
            << ',' << a.cluster << '\n';
}

void write_clusters_summary_json(const std::filesystem::path& path,
                                 const ClusterReport& report) {
    nlohmann::json clusters = nlohmann::json::array();
    for (const auto& [key, counts] : report.composition) {
        clusters.push_back({{"size_bucket", key.first},
                            {"cluster", key.second},
                            {"real", counts[0]},
                            {"random", counts[1]},
                            {"ketgpt", counts[2]}});
    }
    nlohmann::json j{{"metric_schema_version", 1},
                     {"metric_names", kMetricNames},
                     {"total_clusters", report.total_clusters},
                     {"clusters", clusters},
                     {"warnings", report.warnings}};
    std::ofstream out(path);
    out << j.dump(2) << '\n';
}

std::string interaction_dot(const InteractionGraph& g) {
    std::string out = "graph interaction {\n";
    for (int q = 0; q < g.num_qubits; q++)
        out += "  q" + std::to_string(q) + ";\n";
    for (const auto& [pair, w] : g.edges)
        out += "  q" + std::to_string(pair.first) + " -- q" +
               std::to_string(pair.second) + " [label=" + std::to_string(w) +
               "];\n";
    out += "}\n";
    return out;
}

}  // namespace ketgpt::structure
