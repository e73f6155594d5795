#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ketgpt/qasm.hpp"

namespace ketgpt::structure {

struct InteractionGraph {
    int num_qubits = 0;
    // unordered pair (a < b) -> number of multi-qubit gates touching the pair
    std::map<std::pair<int, int>, int> edges;

    std::vector<int> degrees() const;  // unweighted degree per qubit
};

struct GateDependencyGraph {
    int num_gates = 0;
    std::vector<std::vector<int>> out_edges;  // g_i -> later gates sharing a qubit

    // Longest path in nodes; 0 for an empty graph.
    int depth() const;
};

inline constexpr int kNumMetrics = 16;
inline constexpr std::array<const char*, kNumMetrics> kMetricNames = {
    "num_qubits",       "gate_count",           "depth",
    "two_qubit_gate_fraction", "measure_fraction",
    "edge_count",       "density",              "max_degree",
    "min_degree",       "mean_degree",          "degree_stddev",
    "clustering_coefficient",  "connected_components",
    "critical_path_length",    "mean_out_degree", "parallelism",
};

using CircuitMetrics = std::array<double, kNumMetrics>;

InteractionGraph interaction_graph(const qasm::Circuit& c);
GateDependencyGraph dependency_graph(const qasm::Circuit& c);
CircuitMetrics extract_metrics(const qasm::Circuit& c);

enum class Source { Real, Random, KetGpt };
const char* source_name(Source s);

struct MetricRow {
    Source source;
    std::string name;
    CircuitMetrics metrics;
};

struct ClusterAssignment {
    std::string name;
    Source source;
    int size_bucket = 0;
    int cluster = 0;  // within-bucket id
};

struct ClusterReport {
    std::vector<ClusterAssignment> assignments;
    // (bucket, cluster) -> per-source counts
    std::map<std::pair<int, int>, std::array<int, 3>> composition;
    std::vector<std::string> warnings;
    int total_clusters = 0;
};

// Level 1: three num_qubits quantile bands. Level 2: seeded k-means
// (farthest-point init, z-scored features, max 300 iterations, tol 1e-6)
// inside each band, k reduced to the band size when necessary.
ClusterReport cluster(const std::vector<MetricRow>& rows, int k_structure,
                      uint64_t seed);

void write_metrics_csv(const std::filesystem::path& path,
                       const std::vector<MetricRow>& rows);
void write_clusters_csv(const std::filesystem::path& path,
                        const ClusterReport& report);
void write_clusters_summary_json(const std::filesystem::path& path,
                                 const ClusterReport& report);
std::string interaction_dot(const InteractionGraph& g);

}  // namespace ketgpt::structure
