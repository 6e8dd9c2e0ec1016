#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "oracle.hpp"
#include "taintrank/analysis.hpp"
#include "taintrank/error.hpp"

using namespace taintrank;

namespace {

// Re-bins by scanning the edges directly.
std::vector<std::size_t> brute_force_bins(std::span<const double> scores, const Histogram& h) {
  std::vector<std::size_t> counts(h.counts.size(), 0);
  for (double s : scores) {
    if (h.scale == BinScale::log && s <= 0.0) continue;
    for (std::size_t b = 0; b < counts.size(); ++b) {
      const bool last = b + 1 == counts.size();
      if (s >= h.edges[b] && (s < h.edges[b + 1] || (last && s <= h.edges[b + 1]))) {
        ++counts[b];
        break;
      }
    }
  }
  return counts;
}

std::vector<std::string> names(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("n" + std::to_string(i));
  return out;
}

}  // namespace

TEST_CASE("degree distribution of a 3-node chain") {
  const TxGraph g({"a", "b", "c"}, {{0, 1, 1, 1}, {1, 2, 1, 1}});
  const DegreeStats s = degree_distribution(g);
  CHECK(s.in_counts == std::map<std::size_t, std::size_t>{{0, 1}, {1, 2}});
  CHECK(s.out_counts == std::map<std::size_t, std::size_t>{{0, 1}, {1, 2}});
  CHECK(*s.average_degree == doctest::Approx(4.0 / 3.0));
  const auto rows = degree_rows(s);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].direction == "in");
  CHECK(rows[1].fraction == doctest::Approx(2.0 / 3.0));

  std::ostringstream csv;
  write_degree_csv(csv, s);
  CHECK(csv.str().rfind("direction,degree,count,fraction\nin,0,1,", 0) == 0);
}

TEST_CASE("degree sums equal the link count") {
  std::mt19937_64 rng(41);
  for (int round = 0; round < 30; ++round) {
    const TxGraph g = oracle::random_graph(rng, 40, false);
    const DegreeStats s = degree_distribution(g);
    std::size_t in = 0, out = 0, nodes_in = 0, nodes_out = 0;
    for (auto [k, c] : s.in_counts) {
      in += k * c;
      nodes_in += c;
    }
    for (auto [k, c] : s.out_counts) {
      out += k * c;
      nodes_out += c;
    }
    CHECK(in == g.edge_count());
    CHECK(out == g.edge_count());
    CHECK(nodes_in == g.node_count());
    CHECK(nodes_out == g.node_count());
  }
}

TEST_CASE("empty graph has no average degree") {
  const DegreeStats s = degree_distribution(TxGraph{});
  CHECK(s.nodes == 0);
  CHECK_FALSE(s.average_degree.has_value());
  CHECK(degree_rows(s).empty());
}

TEST_CASE("top-k ordering") {
  const std::vector<double> scores = {0.5, 0.9, 0.5};
  const std::vector<std::string> labels = {"A", "B", "C"};
  const auto two = top_k(scores, labels, 2);
  REQUIRE(two.size() == 2);
  CHECK(two[0].label == "B");
  CHECK(two[0].rank == 1);
  CHECK(two[1].label == "A");
  CHECK(two[1].score == 0.5);
  CHECK(top_k(scores, labels, 10).size() == 3);
  CHECK_THROWS_AS(top_k(scores, labels, 0), DomainError);

  std::ostringstream csv;
  write_topk_csv(csv, two);
  CHECK(csv.str() == "rank,label,score\n1,B,0.9\n2,A,0.5\n");
}

TEST_CASE("top-k is a stable prefix") {
  std::mt19937_64 rng(43);
  std::uniform_int_distribution<int> coarse(0, 5);
  std::vector<double> scores(200);
  for (double& s : scores) s = coarse(rng) / 5.0;
  const auto labels = names(scores.size());
  const auto all = top_k(scores, labels, scores.size());
  for (std::size_t k : {1, 7, 50, 199}) {
    const auto part = top_k(scores, labels, k);
    for (std::size_t i = 0; i < k; ++i) CHECK(part[i].node == all[i].node);
  }
}

TEST_CASE("histograms") {
  SUBCASE("uniform scores land in one bin") {
    const std::vector<double> scores(10, 0.25);
    for (auto scale : {BinScale::linear, BinScale::log}) {
      const Histogram h = score_histogram(scores, scale, 5);
      CHECK(h.counts[0] == 10);
      CHECK(h.total() == 10);
    }
  }
  SUBCASE("mass is conserved") {
    std::mt19937_64 rng(47);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> scores(100);
    for (double& s : scores) s = u(rng);
    scores[3] = 0.0;
    CHECK(score_histogram(scores, BinScale::linear, 13).total() == 100);
    const Histogram h = score_histogram(scores, BinScale::log, 13);
    CHECK(h.total() == 100);
    CHECK(h.zero_count == 1);
  }
  SUBCASE("all-zero scores with log bins go to the zero bin") {
    const std::vector<double> zeros(7, 0.0);
    const Histogram h = score_histogram(zeros, BinScale::log, 4);
    CHECK(h.zero_count == 7);
    CHECK(h.total() == 7);
    std::ostringstream csv;
    write_histogram_csv(csv, h);
    CHECK(csv.str().rfind("bin_lo,bin_hi,count\n0,0,7\n", 0) == 0);
  }
  SUBCASE("power-law scores match brute-force binning") {
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int round = 0; round < 20; ++round) {
      std::vector<double> scores(1000);
      for (double& s : scores) s = std::pow(1.0 - u(rng), -1.0 / 1.5) * 1e-6;
      for (auto scale : {BinScale::linear, BinScale::log}) {
        const Histogram h = score_histogram(scores, scale, 1 + round);
        CHECK(h.counts == brute_force_bins(scores, h));
        CHECK(h.total() == scores.size());
      }
    }
  }
  SUBCASE("bad arguments") {
    const std::vector<double> scores = {1.0};
    CHECK_THROWS_AS(score_histogram(scores, BinScale::linear, 0), DomainError);
    const std::vector<double> bad = {NAN};
    CHECK_THROWS_AS(score_histogram(bad, BinScale::linear, 2), DomainError);
  }
}

TEST_CASE("knee of a score curve") {
  const std::vector<double> scores = {1.0, 0.9, 0.8, 0.01, 0.009, 0.0};
  CHECK(knee_rank(scores) == 3);
  CHECK_FALSE(knee_rank(std::vector<double>{1.0, 0.0}).has_value());
}
