#include "bss/jsdnet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "bss/csv.hpp"
#include "bss/divergence.hpp"
#include "bss/error.hpp"
#include "bss/num_format.hpp"
#include "json.hpp"

namespace bss {

JsdNetwork build_network(const std::vector<DayDistribution>& dists,
                         double epsilon) {
  if (dists.size() < 2) {
    throw Error(ErrorCode::invalid_argument, "need at least 2 distributions");
  }
  if (epsilon <= 0) {
    throw Error(ErrorCode::invalid_argument, "epsilon must be positive");
  }
  JsdNetwork net;
  for (const auto& d : dists) {
    if (d.empty()) {
      throw Error(ErrorCode::invalid_argument,
                  "empty distribution '" + d.city + "-" + d.day + "'");
    }
    net.nodes.push_back(d.city + "-" + d.day);
  }
  const int n = static_cast<int>(dists.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double jsd = js_divergence(dists[i].probs, dists[j].probs);
      net.edges.push_back({i, j, 1.0 / std::max(jsd, epsilon)});
    }
  }
  net.community.assign(n, -1);
  return net;
}

namespace {

// Aggregated graph used between Louvain levels. Self-loops carry the
// intra-community weight of collapsed nodes.
struct Graph {
  std::vector<std::vector<std::pair<int, double>>> adj;  // both directions
  std::vector<double> loop;
  std::vector<double> degree;  // sum of incident weights + 2 * loop
  double two_m = 0;

  void finalize() {
    const int n = static_cast<int>(adj.size());
    degree.assign(n, 0.0);
    two_m = 0;
    for (int i = 0; i < n; ++i) {
      double k = 2.0 * loop[i];
      for (const auto& [j, w] : adj[i]) k += w;
      degree[i] = k;
      two_m += k;
    }
  }
};

double graph_modularity(const Graph& g, const std::vector<int>& comm,
                        double resolution) {
  double in = 0, tot_sq = 0;
  const int n = static_cast<int>(g.adj.size());
  std::vector<double> tot(n, 0.0);
  for (int i = 0; i < n; ++i) {
    tot[comm[i]] += g.degree[i];
    in += 2.0 * g.loop[i];
    for (const auto& [j, w] : g.adj[i]) {
      if (comm[j] == comm[i]) in += w;  // both directions counted
    }
  }
  for (double t : tot) tot_sq += (t / g.two_m) * (t / g.two_m);
  return in / g.two_m - resolution * tot_sq;
}

// One local-move sweep phase; returns true if any node changed community.
bool one_level(const Graph& g, std::vector<int>& comm, std::mt19937_64& rng,
               double resolution) {
  const int n = static_cast<int>(g.adj.size());
  std::vector<double> tot(n, 0.0);
  for (int i = 0; i < n; ++i) tot[comm[i]] += g.degree[i];

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  bool any_move = false;
  bool moved = true;
  while (moved) {
    moved = false;
    for (int node : order) {
      const int old_c = comm[node];
      // weight from node to each neighboring community
      std::vector<std::pair<int, double>> neigh;  // (community, k_i_in)
      std::vector<int> seen_pos(n, -1);
      auto add = [&](int c, double w) {
        if (seen_pos[c] < 0) {
          seen_pos[c] = static_cast<int>(neigh.size());
          neigh.emplace_back(c, 0.0);
        }
        neigh[seen_pos[c]].second += w;
      };
      add(old_c, 0.0);
      for (const auto& [j, w] : g.adj[node]) add(comm[j], w);

      tot[old_c] -= g.degree[node];
      int best_c = old_c;
      double best_gain =
          neigh[0].second -
          resolution * tot[old_c] * g.degree[node] / g.two_m;
      for (const auto& [c, k_in] : neigh) {
        if (c == old_c) continue;
        const double gain =
            k_in - resolution * tot[c] * g.degree[node] / g.two_m;
        if (gain > best_gain + 1e-12) {  // strict: ties keep the node put
          best_gain = gain;
          best_c = c;
        }
      }
      tot[best_c] += g.degree[node];
      if (best_c != old_c) {
        comm[node] = best_c;
        moved = true;
        any_move = true;
      }
    }
  }
  return any_move;
}

// Renumber to dense ids in order of first appearance.
int renumber(std::vector<int>& comm) {
  std::vector<int> remap(comm.size(), -1);
  int next = 0;
  for (int& c : comm) {
    if (remap[c] < 0) remap[c] = next++;
    c = remap[c];
  }
  return next;
}

Graph aggregate(const Graph& g, const std::vector<int>& comm, int n_comm) {
  Graph out;
  out.adj.assign(n_comm, {});
  out.loop.assign(n_comm, 0.0);
  std::vector<std::vector<double>> acc(n_comm);
  const int n = static_cast<int>(g.adj.size());
  for (int i = 0; i < n; ++i) {
    out.loop[comm[i]] += g.loop[i];
    for (const auto& [j, w] : g.adj[i]) {
      if (comm[j] == comm[i]) {
        if (j > i) out.loop[comm[i]] += w;  // each undirected edge once
      }
    }
  }
  // inter-community edges
  std::vector<std::vector<double>> weight_to(n_comm);
  for (int ci = 0; ci < n_comm; ++ci) weight_to[ci].assign(n_comm, 0.0);
  for (int i = 0; i < n; ++i) {
    for (const auto& [j, w] : g.adj[i]) {
      if (j > i && comm[i] != comm[j]) {
        weight_to[comm[i]][comm[j]] += w;
        weight_to[comm[j]][comm[i]] += w;
      }
    }
  }
  for (int a = 0; a < n_comm; ++a) {
    for (int b = 0; b < n_comm; ++b) {
      if (weight_to[a][b] > 0) out.adj[a].emplace_back(b, weight_to[a][b]);
    }
  }
  out.finalize();
  return out;
}

}  // namespace

LouvainResult louvain_partition(int n_nodes,
                                const std::vector<NetworkEdge>& edges,
                                std::uint64_t seed, double resolution) {
  if (n_nodes <= 0) {
    throw Error(ErrorCode::invalid_argument, "empty graph");
  }
  Graph g;
  g.adj.assign(n_nodes, {});
  g.loop.assign(n_nodes, 0.0);
  for (const auto& e : edges) {
    if (e.i < 0 || e.j >= n_nodes || e.i >= e.j || !(e.weight > 0) ||
        !std::isfinite(e.weight)) {
      throw Error(ErrorCode::invalid_argument, "bad edge in graph");
    }
    g.adj[e.i].emplace_back(e.j, e.weight);
    g.adj[e.j].emplace_back(e.i, e.weight);
  }
  g.finalize();
  if (g.two_m <= 0) {
    // no edges at all: everything is its own community
    LouvainResult r;
    r.community.resize(n_nodes);
    std::iota(r.community.begin(), r.community.end(), 0);
    r.modularity = 0;
    return r;
  }

  std::mt19937_64 rng(seed);
  LouvainResult result;
  result.community.resize(n_nodes);
  std::iota(result.community.begin(), result.community.end(), 0);

  Graph cur = g;
  std::vector<int> node_to_meta(n_nodes);
  std::iota(node_to_meta.begin(), node_to_meta.end(), 0);

  while (true) {
    std::vector<int> comm(cur.adj.size());
    std::iota(comm.begin(), comm.end(), 0);
    const bool improved = one_level(cur, comm, rng, resolution);
    const int n_comm = renumber(comm);
    for (int i = 0; i < n_nodes; ++i) {
      node_to_meta[i] = comm[node_to_meta[i]];
    }
    result.level_modularity.push_back(graph_modularity(cur, comm, resolution));
    if (!improved || n_comm == static_cast<int>(cur.adj.size())) break;
    cur = aggregate(cur, comm, n_comm);
  }

  result.community = node_to_meta;
  renumber(result.community);
  result.modularity = partition_modularity(n_nodes, edges, result.community,
                                           resolution);
  return result;
}

void detect_communities(JsdNetwork& net, std::uint64_t seed,
                        double resolution) {
  auto r = louvain_partition(static_cast<int>(net.nodes.size()), net.edges,
                             seed, resolution);
  net.community = std::move(r.community);
  net.modularity = r.modularity;
}

double partition_modularity(int n_nodes, const std::vector<NetworkEdge>& edges,
                            const std::vector<int>& community,
                            double resolution) {
  double m = 0;
  std::vector<double> degree(n_nodes, 0.0);
  for (const auto& e : edges) {
    m += e.weight;
    degree[e.i] += e.weight;
    degree[e.j] += e.weight;
  }
  if (m <= 0) return 0;
  double in = 0;
  std::vector<double> tot(n_nodes, 0.0);
  for (const auto& e : edges) {
    if (community[e.i] == community[e.j]) in += e.weight;
  }
  for (int i = 0; i < n_nodes; ++i) tot[community[i]] += degree[i];
  double tot_sq = 0;
  for (double t : tot) tot_sq += (t / (2 * m)) * (t / (2 * m));
  return in / m - resolution * tot_sq;
}

std::vector<NetworkEdge> top_edges(const JsdNetwork& net, std::size_t k) {
  std::vector<NetworkEdge> sorted = net.edges;
  std::sort(sorted.begin(), sorted.end(),
            [&](const NetworkEdge& a, const NetworkEdge& b) {
              if (a.weight != b.weight) return a.weight > b.weight;
              return std::make_pair(net.nodes[a.i], net.nodes[a.j]) <
                     std::make_pair(net.nodes[b.i], net.nodes[b.j]);
            });
  if (k < sorted.size()) sorted.resize(k);
  return sorted;
}

void write_network_csv(const JsdNetwork& net, std::size_t top_k,
                       const std::string& nodes_path,
                       const std::string& edges_path) {
  std::ofstream nodes_out(nodes_path);
  if (!nodes_out) throw Error(ErrorCode::io, "cannot write " + nodes_path);
  nodes_out << "label,community\n";
  for (std::size_t i = 0; i < net.nodes.size(); ++i) {
    csv::write_row(nodes_out, {net.nodes[i], std::to_string(net.community[i])});
  }

  auto top = top_edges(net, top_k);
  auto in_top = [&](const NetworkEdge& e) {
    for (const auto& t : top) {
      if (t.i == e.i && t.j == e.j) return true;
    }
    return false;
  };
  std::ofstream edges_out(edges_path);
  if (!edges_out) throw Error(ErrorCode::io, "cannot write " + edges_path);
  edges_out << "src,dst,weight,in_top_k\n";
  for (const auto& e : net.edges) {
    csv::write_row(edges_out, {net.nodes[e.i], net.nodes[e.j],
                               format_double(e.weight),
                               in_top(e) ? "1" : "0"});
  }
}

std::string network_to_json(const JsdNetwork& net, std::size_t top_k) {
  nlohmann::json j;
  j["modularity"] = net.modularity;
  auto& nodes = j["nodes"] = nlohmann::json::array();
  for (std::size_t i = 0; i < net.nodes.size(); ++i) {
    nodes.push_back({{"label", net.nodes[i]}, {"community", net.community[i]}});
  }
  auto top = top_edges(net, top_k);
  auto in_top = [&](const NetworkEdge& e) {
    for (const auto& t : top) {
      if (t.i == e.i && t.j == e.j) return true;
    }
    return false;
  };
  auto& edges = j["edges"] = nlohmann::json::array();
  for (const auto& e : net.edges) {
    edges.push_back({{"src", net.nodes[e.i]},
                     {"dst", net.nodes[e.j]},
                     {"weight", e.weight},
                     {"in_top_k", in_top(e)}});
  }
  return j.dump(2);
}

}  // namespace bss
