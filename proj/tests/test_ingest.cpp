#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "taintrank/error.hpp"
#include "taintrank/ingest.hpp"

using namespace taintrank;

namespace {

TransactionRecord tx(std::vector<TxEntry> in, std::vector<TxEntry> out,
                     std::optional<std::int64_t> ts = std::nullopt) {
  static int counter = 0;
  return TransactionRecord{"tx" + std::to_string(++counter), std::move(in), std::move(out), ts};
}

ParseResult parse(const std::string& text, ParseOptions opts = {}) {
  std::istringstream in(text);
  return parse_records(in, opts);
}

const Edge* find_edge(const TxGraph& g, std::string_view src, std::string_view dst) {
  for (const Edge& e : g.edges())
    if (g.label(e.src) == src && g.label(e.dst) == dst) return &e;
  return nullptr;
}

}  // namespace

TEST_CASE("parse_records") {
  SUBCASE("empty input") {
    auto r = parse("");
    CHECK(r.records.empty());
    CHECK(r.errors.empty());
  }
  SUBCASE("one record with two inputs and one output") {
    auto r = parse(R"({"tx_id":"t1","timestamp":1308528000,)"
                   R"("inputs":[{"address":"A","value":5},{"address":"B","value":7}],)"
                   R"("outputs":[{"address":"C","value":11}]})"
                   "\n");
    REQUIRE(r.records.size() == 1);
    const auto& rec = r.records[0];
    CHECK(rec.tx_id == "t1");
    CHECK(rec.timestamp == 1308528000);
    CHECK(rec.inputs == std::vector<TxEntry>{{"A", 5}, {"B", 7}});
    CHECK(rec.outputs == std::vector<TxEntry>{{"C", 11}});
  }
  SUBCASE("coinbase without inputs") {
    auto r = parse(R"({"tx_id":"cb","outputs":[{"address":"M","value":5000000000}]})");
    REQUIRE(r.records.size() == 1);
    CHECK(r.records[0].inputs.empty());
    CHECK_FALSE(r.records[0].timestamp.has_value());
  }
  SUBCASE("zero values and unaddressed entries are dropped and counted") {
    auto r = parse(R"({"tx_id":"t","inputs":[{"address":"A","value":3}],)"
                   R"("outputs":[{"address":"B","value":0},{"address":null,"value":1},{"address":"C","value":3}]})");
    REQUIRE(r.records.size() == 1);
    CHECK(r.records[0].outputs == std::vector<TxEntry>{{"C", 3}});
    CHECK(r.dropped.zero_value == 1);
    CHECK(r.dropped.unaddressed == 1);
  }
  SUBCASE("malformed lines are skipped with their line numbers") {
    auto r = parse("{\"tx_id\":\"ok\",\"outputs\":[{\"address\":\"A\",\"value\":1}]}\n"
                   "not json\n"
                   "\n"
                   "{\"tx_id\":\"no-outputs\",\"outputs\":[]}\n"
                   "{\"tx_id\":\"neg\",\"outputs\":[{\"address\":\"A\",\"value\":-1}]}\n"
                   "{\"outputs\":[{\"address\":\"A\",\"value\":1}]}\n"
                   "{\"tx_id\":\"frac\",\"outputs\":[{\"address\":\"A\",\"value\":1.5}]}\n");
    CHECK(r.records.size() == 1);
    REQUIRE(r.errors.size() == 5);
    CHECK(r.errors[0].line == 2);
    CHECK(r.errors[1].line == 4);
    CHECK(r.errors[4].line == 7);
    CHECK(r.lines_read == 7);
  }
  SUBCASE("strict mode aborts at the first error") {
    ParseOptions strict;
    strict.strict = true;
    try {
      parse("{\"tx_id\":\"ok\",\"outputs\":[{\"address\":\"A\",\"value\":1}]}\n[]\n", strict);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
  }
}

TEST_CASE("BTC amounts convert exactly") {
  CHECK(parse_btc_amount("0.1") == 10'000'000);
  CHECK(parse_btc_amount("21000000") == 2'100'000'000'000'000);
  CHECK(parse_btc_amount("0.00000001") == 1);
  CHECK(parse_btc_amount(".5") == 50'000'000);
  CHECK(parse_btc_amount("3.") == 300'000'000);
  CHECK_THROWS_AS(parse_btc_amount("0.000000001"), ParseError);
  CHECK_THROWS_AS(parse_btc_amount("-1"), ParseError);
  CHECK_THROWS_AS(parse_btc_amount("1e3"), ParseError);
  CHECK_THROWS_AS(parse_btc_amount(""), ParseError);
  CHECK_THROWS_AS(parse_btc_amount("99999999999999999999"), ParseError);

  ParseOptions btc;
  btc.unit = ValueUnit::btc;
  auto r = parse(R"({"tx_id":"t","inputs":[{"address":"A","value":0.3}],)"
                 R"("outputs":[{"address":"B","value":1e-8},{"address":"C","value":"0.29999999"},{"address":"D","value":2}]})",
                 btc);
  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0].inputs[0].value == 30'000'000);
  CHECK(r.records[0].outputs == std::vector<TxEntry>{{"B", 1}, {"C", 29'999'999}, {"D", 200'000'000}});
}

TEST_CASE("co-spend clustering") {
  SUBCASE("union is transitive across transactions") {
    std::vector<TransactionRecord> recs = {tx({{"B", 1}, {"A", 1}}, {{"X", 2}}),
                                           tx({{"C", 1}, {"B", 1}}, {{"Y", 2}})};
    const ClusterMap c = cluster_inputs(recs);
    CHECK(c.representative("A") == c.representative("C"));
    CHECK(c.representative("B") == "A");
    CHECK(c.cluster_count() == 1);
    CHECK(c.representative("X") == "X");
  }
  SUBCASE("single inputs stay singletons") {
    std::vector<TransactionRecord> recs = {tx({{"A", 1}}, {{"B", 1}})};
    const ClusterMap c = cluster_inputs(recs);
    CHECK(c.representative("A") == "A");
    CHECK(c.cluster_count() == 1);
    CHECK(c.address_count() == 1);
  }
  SUBCASE("representative is idempotent") {
    ClusterMap c;
    c.unite("q", "p");
    c.unite("r", "s");
    c.unite("s", "q");
    for (std::string a : {"p", "q", "r", "s", "t"})
      CHECK(c.representative(c.representative(a)) == c.representative(a));
    CHECK(c.representative("s") == "p");
  }
}

TEST_CASE("clustering does not depend on record order") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> addr(0, 39), width(1, 4);
  std::vector<TransactionRecord> recs;
  for (int i = 0; i < 30; ++i) {
    std::vector<TxEntry> in;
    for (int k = width(rng); k > 0; --k) in.push_back({"a" + std::to_string(addr(rng)), 1});
    recs.push_back(tx(in, {{"o", 1}}));
  }
  const ClusterMap base = cluster_inputs(recs);
  for (int p = 0; p < 20; ++p) {
    std::shuffle(recs.begin(), recs.end(), rng);
    const ClusterMap other = cluster_inputs(recs);
    CHECK(other.cluster_count() == base.cluster_count());
    for (int a = 0; a < 40; ++a) {
      const std::string name = "a" + std::to_string(a);
      CHECK(other.representative(name) == base.representative(name));
    }
  }
}

TEST_CASE("apportion splits exactly with largest remainders") {
  CHECK(apportion(10, std::vector<Satoshi>{5, 5}) == std::vector<Satoshi>{5, 5});
  CHECK(apportion(10, std::vector<Satoshi>{1, 1, 1}) == std::vector<Satoshi>{4, 3, 3});
  CHECK(apportion(7, std::vector<Satoshi>{2, 1}) == std::vector<Satoshi>{5, 2});
  CHECK(apportion(1, std::vector<Satoshi>{1, 3}) == std::vector<Satoshi>{0, 1});
  CHECK(apportion(5, std::vector<Satoshi>{0, 0}) == std::vector<Satoshi>{0, 0});
  CHECK(apportion(5, std::vector<Satoshi>{}).empty());
  const Satoshi big = 2'100'000'000'000'000;
  const auto parts = apportion(big, std::vector<Satoshi>{big, big / 3, 17});
  CHECK(std::accumulate(parts.begin(), parts.end(), Satoshi{0}) == big);
}

TEST_CASE("build_graph pairing") {
  SUBCASE("single input is split by output value") {
    std::vector<TransactionRecord> recs = {tx({{"A", 10}}, {{"B", 6}, {"C", 4}})};
    const TxGraph g = build_graph(recs).graph;
    CHECK(g.edge_count() == 2);
    CHECK(find_edge(g, "A", "B")->weight == 6);
    CHECK(find_edge(g, "A", "C")->weight == 4);
  }
  SUBCASE("multiple inputs share each output proportionally") {
    std::vector<TransactionRecord> recs = {tx({{"A", 5}, {"B", 5}}, {{"C", 10}})};
    const TxGraph g = build_graph(recs).graph;
    CHECK(find_edge(g, "A", "C")->weight == 5);
    CHECK(find_edge(g, "B", "C")->weight == 5);
  }
  SUBCASE("clustering merges inputs first") {
    std::vector<TransactionRecord> recs = {tx({{"A", 5}, {"B", 5}}, {{"C", 10}})};
    const ClusterMap clusters = cluster_inputs(recs);
    BuildOptions opts;
    opts.clusters = &clusters;
    const TxGraph g = build_graph(recs, opts).graph;
    CHECK(g.node_count() == 2);
    REQUIRE(g.edge_count() == 1);
    CHECK(find_edge(g, "A", "C")->weight == 10);
  }
  SUBCASE("full-mesh-equal ignores input values") {
    std::vector<TransactionRecord> recs = {tx({{"A", 9}, {"B", 1}}, {{"C", 10}})};
    BuildOptions opts;
    opts.pairing = PairingRule::full_mesh_equal;
    const TxGraph equal = build_graph(recs, opts).graph;
    CHECK(find_edge(equal, "A", "C")->weight == 5);
    CHECK(find_edge(equal, "B", "C")->weight == 5);
    const TxGraph prop = build_graph(recs).graph;
    CHECK(find_edge(prop, "A", "C")->weight == 9);
    CHECK(find_edge(prop, "B", "C")->weight == 1);
  }
  SUBCASE("change back to the input is a dropped self-loop") {
    std::vector<TransactionRecord> recs = {tx({{"A", 10}}, {{"B", 6}, {"A", 4}})};
    const auto built = build_graph(recs);
    CHECK(built.graph.edge_count() == 1);
    CHECK(built.stats.self_loop_value == 4);
  }
  SUBCASE("coinbase outputs become source-less nodes") {
    std::vector<TransactionRecord> recs = {tx({}, {{"M", 50}}), tx({{"M", 50}}, {{"N", 50}})};
    const auto built = build_graph(recs);
    CHECK(built.stats.coinbase_transactions == 1);
    CHECK(built.graph.node_value(built.graph.id_of("M"), ValueMode::in) == 0);
    CHECK(built.graph.edge_count() == 1);
  }
  SUBCASE("repeated transfers between a pair aggregate across transactions") {
    std::vector<TransactionRecord> recs = {tx({{"A", 3}}, {{"B", 3}}), tx({{"A", 2}}, {{"B", 2}})};
    const TxGraph g = build_graph(recs).graph;
    CHECK(*find_edge(g, "A", "B") == Edge{0, 1, 5, 2});
  }
  SUBCASE("empty record set gives the empty graph") {
    CHECK(build_graph({}).graph.node_count() == 0);
  }
}

TEST_CASE("time window is inclusive and drops untimed records") {
  std::vector<TransactionRecord> recs = {tx({{"A", 1}}, {{"B", 1}}, 100), tx({{"B", 1}}, {{"C", 1}}, 200),
                                         tx({{"C", 1}}, {{"D", 1}}, 201), tx({{"D", 1}}, {{"E", 1}})};
  const TimeWindow w{100, 200};
  CHECK(filter_window(recs, w).size() == 2);
  BuildOptions opts;
  opts.window = w;
  const auto built = build_graph(recs, opts);
  CHECK(built.stats.transactions_used == 2);
  CHECK(built.stats.transactions_outside_window == 2);
  CHECK(built.graph.node_count() == 3);
}

TEST_CASE("value is conserved per transaction and clustering never grows the graph") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> addr(0, 29), width(0, 4), out_width(1, 4);
  std::uniform_int_distribution<Satoshi> value(1, 1'000'000);
  std::vector<TransactionRecord> recs;
  for (int i = 0; i < 200; ++i) {
    std::vector<TxEntry> in, out;
    for (int k = width(rng); k > 0; --k) in.push_back({"a" + std::to_string(addr(rng)), value(rng)});
    for (int k = out_width(rng); k > 0; --k) out.push_back({"a" + std::to_string(addr(rng)), value(rng)});
    recs.push_back(tx(in, out));
  }
  const ClusterMap clusters = cluster_inputs(recs);
  for (auto pairing : {PairingRule::proportional, PairingRule::full_mesh_equal}) {
    for (const ClusterMap* c : {static_cast<const ClusterMap*>(nullptr), &clusters}) {
      for (const auto& rec : recs) {
        const auto tt = transaction_transfers(rec, c, pairing);
        Satoshi routed = 0;
        for (const auto& t : tt.transfers) {
          CHECK(t.src != t.dst);
          routed += t.value;
        }
        Satoshi outputs = 0;
        for (const auto& o : rec.outputs) outputs += o.value;
        if (rec.inputs.empty())
          CHECK(routed == 0);
        else
          CHECK(routed + tt.self_loop_value == outputs);
      }
    }
    BuildOptions plain, merged;
    plain.pairing = merged.pairing = pairing;
    merged.clusters = &clusters;
    const TxGraph a = build_graph(recs, plain).graph;
    const TxGraph b = build_graph(recs, merged).graph;
    CHECK(b.node_count() <= a.node_count());
    CHECK(b.edge_count() <= a.edge_count());
  }
}
