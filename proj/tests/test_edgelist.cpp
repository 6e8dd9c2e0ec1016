#include <doctest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include "oracle.hpp"
#include "taintrank/edgelist.hpp"
#include "taintrank/error.hpp"

using namespace taintrank;

TEST_CASE("graph -> edgelist -> graph is the identity") {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 50; ++round) {
    const TxGraph g = oracle::random_graph(rng, 15, round % 2 == 0, 1'000'000'000'000ULL);
    std::stringstream edges, labels;
    write_edgelist(g, edges, labels);
    const TxGraph back = read_edgelist(edges, labels);
    REQUIRE(back.node_count() == g.node_count());
    CHECK(std::equal(g.labels().begin(), g.labels().end(), back.labels().begin()));
    REQUIRE(back.edge_count() == g.edge_count());
    CHECK(std::equal(g.edges().begin(), g.edges().end(), back.edges().begin()));
  }
}

TEST_CASE("edgelist rows are sorted by (src, dst)") {
  const TxGraph g({"a", "b", "c"}, {{2, 0, 5, 1}, {0, 2, 7, 3}, {0, 1, 1, 1}});
  std::stringstream edges, labels;
  write_edgelist(g, edges, labels);
  CHECK(edges.str() == "0\t1\t1\t1\n0\t2\t7\t3\n2\t0\t5\t1\n");
  CHECK(labels.str() == "0\ta\n1\tb\n2\tc\n");
}

TEST_CASE("malformed edgelists are reported") {
  auto read = [](std::string e, std::string l) {
    std::istringstream edges(e), labels(l);
    return read_edgelist(edges, labels);
  };
  CHECK_THROWS_AS(read("0\t1\t5\n", "0\ta\n1\tb\n"), ParseError);
  CHECK_THROWS_AS(read("0\t1\tx\t1\n", "0\ta\n1\tb\n"), ParseError);
  CHECK_THROWS_AS(read("0\t1\t-5\t1\n", "0\ta\n1\tb\n"), ParseError);
  CHECK_THROWS_AS(read("", "0\ta\n0\tb\n"), ParseError);
  CHECK_THROWS_AS(read("", "0\ta\n2\tb\n"), DomainError);
  CHECK_THROWS_AS(read("0\t1\t5\t1\n0\t1\t5\t1\n", "0\ta\n1\tb\n"), DomainError);
  try {
    read("0\t1\t5\t1\n0\t1\n", "0\ta\n1\tb\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK(read("0\t1\t5\t1\r\n", "1\tb\r\n0\ta\r\n").label(1) == "b");
}

TEST_CASE("save and load through files") {
  const auto dir = std::filesystem::temp_directory_path() / "taintrank_edgelist_test";
  std::filesystem::create_directories(dir);
  const TxGraph g({"x", "y"}, {{0, 1, 42, 2}});
  save_graph(g, dir / "g");
  const TxGraph back = load_graph(dir / "g");
  CHECK(back.edges()[0] == Edge{0, 1, 42, 2});
  CHECK_THROWS_AS(load_graph(dir / "missing"), IoError);
  std::filesystem::remove_all(dir);
}
