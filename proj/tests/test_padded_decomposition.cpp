#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "padnet/error.hpp"
#include "padnet/generators.hpp"
#include "padnet/padded_decomposition.hpp"

using namespace padnet;

namespace {

Graph star(int leaves) {
  std::vector<Edge> e;
  for (int i = 1; i <= leaves; ++i) e.push_back({0, i});
  return Graph(leaves + 1, e, false);
}

int max_diameter(const Clustering& c, const DistanceMatrix& dm) {
  const auto d = cluster_diameters(c, dm);
  return d.empty() ? 0 : *std::max_element(d.begin(), d.end());
}

// CDF of the truncated exponential by Simpson's rule on the density.
double cdf_numeric(double r, int n, double z) {
  const int steps = 2000;
  const double h = z / steps;
  auto pdf = [&](double s) { return (n / (n - 1.0)) * std::exp(-s / r) / r; };
  double acc = pdf(0) + pdf(z);
  for (int i = 1; i < steps; ++i) acc += (i % 2 ? 4.0 : 2.0) * pdf(i * h);
  return acc * h / 3.0;
}

}  // namespace

TEST(Params, Formulas) {
  const auto p = PaddedDecompositionParams::make(2, 0.25, 32);
  EXPECT_DOUBLE_EQ(p.r, 16.0);
  EXPECT_DOUBLE_EQ(p.radius_cap, 16.0 * std::log(32.0) + 2.0);
  EXPECT_THROW(PaddedDecompositionParams::make(-1, 0.5, 4), ConfigError);
  EXPECT_THROW(PaddedDecompositionParams::make(1, 0.0, 4), ConfigError);
  EXPECT_THROW(PaddedDecompositionParams::make(1, 1.5, 4), ConfigError);
  EXPECT_NO_THROW(PaddedDecompositionParams::make(1, 1.0, 4));
}

TEST(SampleRadius, InverseCdf) {
  const auto p = PaddedDecompositionParams::make(3, 1.0, 8);  // r = 6
  EXPECT_DOUBLE_EQ(radius_from_uniform(p, 0.0), 0.0);
  EXPECT_NEAR(radius_from_uniform(p, 0.5), 3.4522, 1e-4);
  EXPECT_NEAR(radius_from_uniform(p, 0.5), -6.0 * std::log(0.5625), 1e-12);
  EXPECT_NEAR(cdf_numeric(6.0, 8, radius_from_uniform(p, 0.5)), 0.5, 1e-9);
  EXPECT_NEAR(radius_from_uniform(p, std::nextafter(1.0, 0.0)), 6.0 * std::log(8.0), 1e-6);
  for (double u : {0.1, 0.3, 0.7, 0.95}) {
    EXPECT_NEAR(cdf_numeric(6.0, 8, radius_from_uniform(p, u)), u, 1e-9);
  }
}

TEST(SampleRadius, CappedAndRejectsTinyGraphs) {
  const auto p = PaddedDecompositionParams::make(2, 0.5, 16);
  RngStream rng(1, StreamTag::Radius, 0, 0);
  for (int i = 0; i < 1000; ++i) {
    const double z = sample_radius(p, rng);
    EXPECT_GE(z, 0.0);
    EXPECT_LE(z, p.radius_cap);
  }
  const auto one = PaddedDecompositionParams::make(1, 0.5, 1);
  EXPECT_THROW(sample_radius(one, rng), InputError);
}

TEST(Centralized, KZeroAndSingleNode) {
  const Graph g = gnp_graph(12, 0.3, 3);
  const DistanceMatrix dm(g);
  const auto p = PaddedDecompositionParams::make(0, 0.5, 12);
  const auto c = sample_decomposition_centralized(dm, p, 5);
  EXPECT_NO_THROW(check_clustering(c, p, dm));
  for (NodeId u = 0; u < 12; ++u) EXPECT_TRUE(is_padded(c, u, 0, dm));

  const Graph one(1, {}, true);
  const auto p1 = PaddedDecompositionParams::make(1, 0.5, 1);
  const auto c1 = sample_decomposition_centralized(one, p1, 5);
  EXPECT_EQ(c1.cluster_count(), 1);
  EXPECT_EQ(c1.centers[0], 0);
}

TEST(Centralized, MatchesBallCarvingDefinition) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Graph g = gnp_graph(14, 0.15, seed);
    const auto p = PaddedDecompositionParams::make(1, 0.5, 14);
    const auto c = sample_decomposition_centralized(g, p, seed * 7);
    const auto ref = oracle::carve(g, c);
    for (NodeId u = 0; u < 14; ++u) EXPECT_EQ(c.center_of(u), ref[static_cast<std::size_t>(u)]);
  }
}

TEST(Centralized, PaddingOnSixteenCycle) {
  const Graph g = cycle_graph(16);
  const DistanceMatrix dm(g);
  const auto p = PaddedDecompositionParams::make(1, 0.5, 16);
  const int N = 2000;
  const auto runs = sample_decompositions_centralized(dm, p, 42, N, PermutationMode::Random, Execution::Serial);
  const double slack = 3.0 * std::sqrt(0.25 / N);
  for (NodeId u = 0; u < 16; ++u) {
    int hit = 0;
    for (const auto& c : runs) hit += is_padded(c, u, 1, dm);
    EXPECT_GE(static_cast<double>(hit) / N, 0.5 - slack) << "node " << u;
  }
}

TEST(Centralized, ParallelBatchMatchesSerial) {
  const Graph g = grid_graph(5, 5);
  const DistanceMatrix dm(g);
  const auto p = PaddedDecompositionParams::make(1, 0.5, 25);
  const auto a = sample_decompositions_centralized(dm, p, 9, 64, PermutationMode::Random, Execution::Serial);
  const auto b = sample_decompositions_centralized(dm, p, 9, 64, PermutationMode::Random, Execution::Parallel);
  EXPECT_EQ(a, b);
}

TEST(Distributed, EqualsCentralizedInIdOrder) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Graph g = gnp_graph(20, 0.12, seed);
    const DistanceMatrix dm(g);
    const auto p = PaddedDecompositionParams::make(2, 0.5, 20);
    const auto dist = sample_decompositions_distributed(g, p, seed, 10);
    ASSERT_EQ(dist.runs.size(), 10u);
    for (std::size_t i = 0; i < 10; ++i) {
      CentralizedOptions opt;
      opt.permutation = PermutationMode::IdOrder;
      opt.iteration = i;
      const auto c = sample_decomposition_centralized(dm, p, seed, opt);
      EXPECT_EQ(dist.runs[i].assignment, c.assignment);
      EXPECT_EQ(dist.runs[i].centers, c.centers);
    }
  }
}

TEST(Distributed, SingleRunHelperMatchesBatch) {
  const Graph g = grid_graph(4, 4);
  const auto p = PaddedDecompositionParams::make(1, 0.5, 16);
  const auto one = sample_decomposition_distributed(g, p, 3);
  const auto batch = sample_decompositions_distributed(g, p, 3, 1);
  EXPECT_EQ(one.clustering, batch.runs[0]);
  EXPECT_EQ(one.transcript, batch.transcript);
}

TEST(Distributed, StarRoundBound) {
  const Graph g = star(9);
  const auto p = PaddedDecompositionParams::make(1, 1.0, 10);
  EXPECT_DOUBLE_EQ(p.radius_cap, 2.0 * std::log(10.0) + 1.0);
  const auto res = sample_decomposition_distributed(g, p, 1);
  EXPECT_LE(res.transcript.rounds_elapsed, static_cast<int>(std::ceil(p.radius_cap)) + 2);
  EXPECT_TRUE(res.transcript.consistent());
}

TEST(Distributed, RoutesWalkShortestPathsToCenters) {
  const Graph g = gnp_graph(24, 0.1, 4);
  const DistanceMatrix dm(g);
  const auto p = PaddedDecompositionParams::make(1, 0.5, 24);
  const auto dist = sample_decompositions_distributed(g, p, 8, 6);
  for (std::size_t run = 0; run < 6; ++run) {
    for (NodeId u = 0; u < 24; ++u) {
      const NodeId c = dist.runs[run].center_of(u);
      int hops = 0;
      for (NodeId x = u; x != c; x = dist.parent_toward(run, x, c)) ++hops;
      EXPECT_EQ(hops, dm(u, c));
    }
  }
  EXPECT_THROW(dist.parent_toward(0, 0, 999), InternalError);
}

TEST(Distributed, DiametersOnRandomGraph) {
  const Graph g = gnp_graph(64, 0.05, 12);
  const DistanceMatrix dm(g);
  const auto p = PaddedDecompositionParams::make(1, 0.5, 64);
  const auto dist = sample_decompositions_distributed(g, p, 12, 100);
  const auto cen = sample_decompositions_centralized(dm, p, 12, 400, PermutationMode::Random, Execution::Serial);
  for (const auto* set : {&dist.runs, &cen}) {
    for (const auto& c : *set) {
      EXPECT_LE(max_diameter(c, dm), 2.0 * p.radius_cap);
      EXPECT_NO_THROW(check_clustering(c, p, dm));
    }
  }
}

TEST(Distributed, ParallelMatchesSerial) {
  const Graph g = gnp_graph(30, 0.1, 2);
  const auto p = PaddedDecompositionParams::make(2, 0.5, 30);
  SimOptions par;
  par.execution = Execution::Parallel;
  const auto a = sample_decompositions_distributed(g, p, 4, 16);
  const auto b = sample_decompositions_distributed(g, p, 4, 16, par);
  EXPECT_EQ(a.runs, b.runs);
  EXPECT_EQ(a.transcript, b.transcript);
}

TEST(Clustering, CsvFormat) {
  const Graph g(3, {{0, 1}, {1, 2}}, true);
  const auto p = PaddedDecompositionParams::make(1, 0.5, 3);
  const auto c = sample_decomposition_centralized(g, p, 1);
  std::ostringstream out;
  write_clustering_csv(out, c);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "node,cluster_id,center,r_v");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 3);
}
