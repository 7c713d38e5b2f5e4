#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bss/timeseries.hpp"

namespace bss {

struct NetworkEdge {
  int i = 0;
  int j = 0;  // i < j
  double weight = 0;
};

// Complete weighted graph over labeled distributions; weight = 1 / JSD,
// capped at 1/epsilon when a pair of distributions is identical.
struct JsdNetwork {
  std::vector<std::string> nodes;            // "CITY-Mon" labels
  std::vector<NetworkEdge> edges;            // n(n-1)/2, i < j
  std::vector<int> community;                // node -> community id, -1 unassigned
  double modularity = 0;
};

JsdNetwork build_network(const std::vector<DayDistribution>& dists,
                         double epsilon = 1e-9);

struct LouvainResult {
  std::vector<int> community;       // dense ids 0..k-1
  double modularity = 0;
  std::vector<double> level_modularity;  // non-decreasing across levels
};

// Weighted-modularity Louvain over an undirected graph given as an edge
// list (i < j, no self loops). Node visit order is shuffled by `seed`.
LouvainResult louvain_partition(int n_nodes,
                                const std::vector<NetworkEdge>& edges,
                                std::uint64_t seed, double resolution = 1.0);

// Applies louvain_partition and stores the result on the network.
void detect_communities(JsdNetwork& net, std::uint64_t seed,
                        double resolution = 1.0);

// Modularity of an arbitrary partition; also the brute-force oracle's scorer.
double partition_modularity(int n_nodes, const std::vector<NetworkEdge>& edges,
                            const std::vector<int>& community,
                            double resolution = 1.0);

// k highest-weight edges, ties broken by (label_i, label_j) ascending.
std::vector<NetworkEdge> top_edges(const JsdNetwork& net, std::size_t k);

void write_network_csv(const JsdNetwork& net, std::size_t top_k,
                       const std::string& nodes_path,
                       const std::string& edges_path);
std::string network_to_json(const JsdNetwork& net, std::size_t top_k);

}  // namespace bss
