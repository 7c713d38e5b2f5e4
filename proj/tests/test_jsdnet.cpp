#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "bss/divergence.hpp"
#include "bss/error.hpp"
#include "bss/jsdnet.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace bss;

namespace {

DayDistribution dist(const std::string& city, const std::string& day,
                     std::vector<double> probs) {
  DayDistribution d;
  d.city = city;
  d.day = day;
  d.bin_width = static_cast<int>(1440 / probs.size());
  d.probs = std::move(probs);
  d.total_count = 100;
  return d;
}

double best_partition_modularity(int n, const std::vector<NetworkEdge>& edges,
                                 std::vector<int>* best_out = nullptr) {
  double best = -1e9;
  testutil::for_each_partition(n, [&](const std::vector<int>& part) {
    const double q = partition_modularity(n, edges, part);
    if (q > best) {
      best = q;
      if (best_out) *best_out = part;
    }
  });
  return best;
}

}  // namespace

TEST_CASE("build_network caps identical pairs at 1/epsilon") {
  const auto a = dist("X", "Mon", {0.5, 0.5});
  const auto b = dist("X", "Tue", {0.5, 0.5});
  const auto net = build_network({a, b}, 1e-9);
  REQUIRE(net.edges.size() == 1);
  CHECK(net.edges[0].weight == doctest::Approx(1e9));
  CHECK(net.nodes[0] == "X-Mon");
}

TEST_CASE("42 distributions give 42 nodes and 861 edges") {
  std::mt19937_64 rng(5);
  std::vector<DayDistribution> dists;
  for (int c = 0; c < 6; ++c) {
    for (int d = 0; d < 7; ++d) {
      std::vector<double> probs(24);
      double sum = 0;
      for (auto& p : probs) {
        p = std::uniform_real_distribution<double>(0.01, 1.0)(rng);
        sum += p;
      }
      for (auto& p : probs) p /= sum;
      dists.push_back(dist("C" + std::to_string(c), kDayNames[d], probs));
    }
  }
  const auto net = build_network(dists, 1e-9);
  CHECK(net.nodes.size() == 42);
  CHECK(net.edges.size() == 861);  // 42*41/2
  for (const auto& e : net.edges) {
    CHECK(e.weight > 0);
    CHECK(std::isfinite(e.weight));
  }
}

TEST_CASE("edge weights are inverse JSD") {
  const auto a = dist("X", "Mon", {0.7, 0.3});
  const auto b = dist("X", "Tue", {0.5, 0.5});
  const auto c = dist("X", "Sat", {0.2, 0.8});
  const auto net = build_network({a, b, c}, 1e-9);
  REQUIRE(net.edges.size() == 3);
  CHECK(net.edges[0].weight ==
        doctest::Approx(1.0 / js_divergence(a.probs, b.probs)));
  CHECK(net.edges[2].weight ==
        doctest::Approx(1.0 / js_divergence(b.probs, c.probs)));
  CHECK_THROWS_AS(build_network({a}, 1e-9), Error);
  auto empty = dist("X", "Sun", {0.0, 0.0});
  empty.total_count = 0;
  CHECK_THROWS_AS(build_network({a, empty}, 1e-9), Error);
}

TEST_CASE("louvain separates two weakly joined cliques") {
  std::vector<NetworkEdge> edges;
  for (int block = 0; block < 2; ++block) {
    const int base = block * 4;
    for (int i = 0; i < 4; ++i) {
      for (int j = i + 1; j < 4; ++j) {
        edges.push_back({base + i, base + j, 10.0});
      }
    }
  }
  edges.push_back({0, 4, 0.1});

  const auto result = louvain_partition(8, edges, 42);
  std::set<int> left, right;
  for (int i = 0; i < 4; ++i) left.insert(result.community[i]);
  for (int i = 4; i < 8; ++i) right.insert(result.community[i]);
  CHECK(left.size() == 1);
  CHECK(right.size() == 1);
  CHECK(*left.begin() != *right.begin());

  // exhaustive search confirms this is the modularity optimum
  CHECK(result.modularity ==
        doctest::Approx(best_partition_modularity(8, edges)).epsilon(1e-12));
}

TEST_CASE("uniform complete graph stays one community") {
  std::vector<NetworkEdge> edges;
  for (int i = 0; i < 6; ++i) {
    for (int j = i + 1; j < 6; ++j) edges.push_back({i, j, 1.0});
  }
  const auto result = louvain_partition(6, edges, 7);
  const std::set<int> ids(result.community.begin(), result.community.end());
  CHECK(ids.size() == 1);
}

TEST_CASE("louvain partition beats the trivial partitions") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<NetworkEdge> edges;
    const int n = 7;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        edges.push_back(
            {i, j, std::uniform_real_distribution<double>(0.05, 5.0)(rng)});
      }
    }
    const auto result = louvain_partition(n, edges, 1234 + trial);
    std::vector<int> singletons(n), together(n, 0);
    std::iota(singletons.begin(), singletons.end(), 0);
    CHECK(result.modularity >=
          partition_modularity(n, edges, singletons) - 1e-12);
    CHECK(result.modularity >=
          partition_modularity(n, edges, together) - 1e-12);
    // levels only improve
    for (std::size_t l = 1; l < result.level_modularity.size(); ++l) {
      CHECK(result.level_modularity[l] >=
            result.level_modularity[l - 1] - 1e-12);
    }
  }
}

TEST_CASE("fixed seed reproduces the partition") {
  std::mt19937_64 rng(23);
  std::vector<NetworkEdge> edges;
  for (int i = 0; i < 12; ++i) {
    for (int j = i + 1; j < 12; ++j) {
      edges.push_back(
          {i, j, std::uniform_real_distribution<double>(0.1, 3.0)(rng)});
    }
  }
  const auto a = louvain_partition(12, edges, 99);
  const auto b = louvain_partition(12, edges, 99);
  CHECK(a.community == b.community);
  CHECK(a.modularity == b.modularity);
}

TEST_CASE("top_edges ordering and subset structure") {
  JsdNetwork net;
  net.nodes = {"a", "b", "c", "d"};
  net.edges = {{0, 1, 5.0}, {0, 2, 1.0}, {0, 3, 4.0}, {1, 2, 3.0}, {2, 3, 2.0}};
  net.community = {0, 0, 0, 0};

  CHECK(top_edges(net, 0).empty());
  CHECK(top_edges(net, 99).size() == 5);

  const auto top2 = top_edges(net, 2);
  REQUIRE(top2.size() == 2);
  CHECK(top2[0].weight == 5.0);
  CHECK(top2[1].weight == 4.0);

  for (std::size_t k = 0; k < 5; ++k) {
    const auto smaller = top_edges(net, k);
    const auto larger = top_edges(net, k + 1);
    for (std::size_t i = 0; i < smaller.size(); ++i) {
      CHECK(smaller[i].i == larger[i].i);
      CHECK(smaller[i].j == larger[i].j);
    }
  }

  SUBCASE("ties break lexicographically") {
    net.edges = {{0, 1, 2.0}, {2, 3, 2.0}, {0, 2, 2.0}};
    const auto t = top_edges(net, 2);
    CHECK(t[0].i == 0);
    CHECK(t[0].j == 1);
    CHECK(t[1].i == 0);
    CHECK(t[1].j == 2);
  }
}

TEST_CASE("network CSV export flags top-k edges") {
  testutil::TempDir tmp("netcsv");
  auto net = build_network({dist("X", "Mon", {0.7, 0.3}),
                            dist("X", "Tue", {0.5, 0.5}),
                            dist("X", "Sat", {0.1, 0.9})},
                           1e-9);
  detect_communities(net, 1);
  const auto nodes = (tmp.path() / "nodes.csv").string();
  const auto edges = (tmp.path() / "edges.csv").string();
  write_network_csv(net, 1, nodes, edges);
  const auto edge_text = testutil::read_file(edges);
  CHECK(edge_text.find(",1\n") != std::string::npos);
  CHECK(edge_text.find(",0\n") != std::string::npos);
  const auto node_text = testutil::read_file(nodes);
  CHECK(node_text.find("X-Mon,") != std::string::npos);
}
