#include "taintrank/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "taintrank/error.hpp"

namespace taintrank {

using nlohmann::json;

namespace {

constexpr Satoshi kMaxSatoshi = std::numeric_limits<std::int64_t>::max();

Satoshi btc_to_satoshi(std::uint64_t whole) {
  if (whole > kMaxSatoshi / kSatoshiPerBtc) throw ParseError(0, "value overflows satoshi range");
  return whole * kSatoshiPerBtc;
}

Satoshi integer_satoshi(std::string_view text) {
  Satoshi v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || v > kMaxSatoshi)
    throw ParseError(0, "invalid satoshi amount '" + std::string(text) + "'");
  return v;
}

Satoshi value_of(const json& v, ValueUnit unit) {
  if (v.is_number_unsigned()) {
    auto n = v.get<std::uint64_t>();
    if (unit == ValueUnit::btc) return btc_to_satoshi(n);
    if (n > kMaxSatoshi) throw ParseError(0, "value overflows satoshi range");
    return n;
  }
  if (v.is_number_integer()) throw ParseError(0, "negative value");
  if (v.is_number_float()) {
    double d = v.get<double>();
    if (!std::isfinite(d) || d < 0) throw ParseError(0, "negative or non-finite value");
    // Shortest fixed-point text that round-trips, then exact decimal parsing.
    char buf[400];
    auto res = std::to_chars(buf, buf + sizeof buf, d, std::chars_format::fixed);
    std::string_view text(buf, static_cast<std::size_t>(res.ptr - buf));
    if (unit == ValueUnit::btc) return parse_btc_amount(text);
    if (d != std::floor(d)) throw ParseError(0, "fractional satoshi value");
    return integer_satoshi(text.substr(0, text.find('.')));
  }
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    return unit == ValueUnit::btc ? parse_btc_amount(s) : integer_satoshi(s);
  }
  throw ParseError(0, "value must be a number or a numeric string");
}

std::vector<TxEntry> entries_of(const json& record, const char* key, ValueUnit unit,
                                DroppedEntries& dropped) {
  std::vector<TxEntry> out;
  auto it = record.find(key);
  if (it == record.end() || it->is_null()) return out;
  if (!it->is_array()) throw ParseError(0, std::string("'") + key + "' must be an array");
  for (const json& e : *it) {
    if (!e.is_object()) throw ParseError(0, std::string("'") + key + "' entries must be objects");
    auto value = e.find("value");
    if (value == e.end()) throw ParseError(0, std::string("'") + key + "' entry without value");
    Satoshi sat = value_of(*value, unit);
    auto address = e.find("address");
    if (address == e.end() || address->is_null() ||
        (address->is_string() && address->get_ref<const std::string&>().empty())) {
      ++dropped.unaddressed;
      continue;
    }
    if (!address->is_string()) throw ParseError(0, "address must be a string");
    const auto& text = address->get_ref<const std::string&>();
    if (text.find_first_of("\t\r\n") != std::string::npos)
      throw ParseError(0, "address contains a tab or line break");
    if (sat == 0) {
      ++dropped.zero_value;
      continue;
    }
    out.push_back(TxEntry{text, sat});
  }
  return out;
}

}  // namespace

Satoshi parse_btc_amount(std::string_view text) {
  auto fail = [&](const char* why) -> ParseError {
    return ParseError(0, std::string(why) + ": '" + std::string(text) + "'");
  };
  auto dot = text.find('.');
  std::string_view whole = text.substr(0, dot);
  std::string_view frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
  if (whole.empty() && frac.empty()) throw fail("empty BTC amount");
  if (frac.size() > 8) throw fail("more than 8 decimals in BTC amount");
  auto digits = [](std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  if (!digits(whole) || !digits(frac)) throw fail("invalid BTC amount");

  std::uint64_t w = 0;
  if (!whole.empty()) {
    auto [ptr, ec] = std::from_chars(whole.data(), whole.data() + whole.size(), w);
    if (ec != std::errc{}) throw fail("BTC amount out of range");
  }
  std::uint64_t f = 0;
  for (std::size_t i = 0; i < 8; ++i) f = f * 10 + (i < frac.size() ? frac[i] - '0' : 0);
  Satoshi base = btc_to_satoshi(w);
  if (base + f > kMaxSatoshi) throw fail("BTC amount out of range");
  return base + f;
}

TransactionRecord parse_record(std::string_view text, ValueUnit unit, DroppedEntries* dropped) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(0, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError(0, "record must be a JSON object");

  TransactionRecord rec;
  auto id = doc.find("tx_id");
  if (id == doc.end() || !id->is_string()) throw ParseError(0, "missing string field 'tx_id'");
  rec.tx_id = id->get<std::string>();

  if (auto ts = doc.find("timestamp"); ts != doc.end() && !ts->is_null()) {
    if (!ts->is_number_integer()) throw ParseError(0, "'timestamp' must be an integer");
    rec.timestamp = ts->get<std::int64_t>();
  }

  auto outputs = doc.find("outputs");
  if (outputs == doc.end() || !outputs->is_array() || outputs->empty())
    throw ParseError(0, "'outputs' must be a non-empty array");

  DroppedEntries local;
  rec.inputs = entries_of(doc, "inputs", unit, local);
  rec.outputs = entries_of(doc, "outputs", unit, local);
  if (dropped) {
    dropped->zero_value += local.zero_value;
    dropped->unaddressed += local.unaddressed;
  }
  return rec;
}

ParseResult parse_records(std::istream& in, const ParseOptions& options) {
  ParseResult result;
  std::string line;
  while (std::getline(in, line)) {
    ++result.lines_read;
    std::string_view view = line;
    if (view.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      result.records.push_back(parse_record(view, options.unit, &result.dropped));
    } catch (const ParseError& e) {
      if (options.strict) throw ParseError(result.lines_read, e.what());
      result.errors.push_back(ParseIssue{result.lines_read, e.what()});
    }
  }
  if (in.bad()) throw IoError("read error after line " + std::to_string(result.lines_read));
  return result;
}

std::size_t ClusterMap::intern(std::string_view address) {
  if (auto it = index_.find(address); it != index_.end()) return it->second;
  const std::size_t i = addresses_.size();
  addresses_.emplace_back(address);
  index_.emplace(addresses_.back(), i);
  parent_.push_back(i);
  size_.push_back(1);
  smallest_.push_back(i);
  ++clusters_;
  return i;
}

std::size_t ClusterMap::root(std::size_t i) const {
  while (parent_[i] != i) i = parent_[i];
  return i;
}

void ClusterMap::add(std::string_view address) { intern(address); }

void ClusterMap::unite(std::string_view a, std::string_view b) {
  auto find = [this](std::size_t i) {
    while (parent_[i] != i) {
      parent_[i] = parent_[parent_[i]];
      i = parent_[i];
    }
    return i;
  };
  std::size_t ra = find(intern(a));
  std::size_t rb = find(intern(b));
  if (ra == rb) return;
  if (size_[ra] < size_[rb]) std::swap(ra, rb);
  parent_[rb] = ra;
  size_[ra] += size_[rb];
  if (addresses_[smallest_[rb]] < addresses_[smallest_[ra]]) smallest_[ra] = smallest_[rb];
  --clusters_;
}

std::string_view ClusterMap::representative(std::string_view address) const {
  auto it = index_.find(address);
  if (it == index_.end()) return address;
  return addresses_[smallest_[root(it->second)]];
}

ClusterMap cluster_inputs(std::span<const TransactionRecord> records) {
  ClusterMap clusters;
  for (const auto& rec : records) {
    if (rec.inputs.empty()) continue;
    clusters.add(rec.inputs.front().address);
    for (std::size_t i = 1; i < rec.inputs.size(); ++i)
      clusters.unite(rec.inputs.front().address, rec.inputs[i].address);
  }
  return clusters;
}

std::string_view to_string(PairingRule rule) {
  switch (rule) {
    case PairingRule::proportional: return "proportional";
    case PairingRule::full_mesh_equal: return "full-mesh-equal";
  }
  return "?";
}

std::optional<PairingRule> parse_pairing(std::string_view text) {
  if (text == "proportional") return PairingRule::proportional;
  if (text == "full-mesh-equal") return PairingRule::full_mesh_equal;
  return std::nullopt;
}

std::vector<TransactionRecord> filter_window(std::span<const TransactionRecord> records,
                                             TimeWindow window) {
  std::vector<TransactionRecord> kept;
  for (const auto& rec : records)
    if (rec.timestamp && window.contains(*rec.timestamp)) kept.push_back(rec);
  return kept;
}

std::vector<Satoshi> apportion(Satoshi total, std::span<const Satoshi> shares) {
  __extension__ using u128 = unsigned __int128;
  std::vector<Satoshi> parts(shares.size(), 0);
  u128 sum = 0;
  for (Satoshi s : shares) sum += s;
  if (sum == 0) return parts;

  std::vector<u128> remainder(shares.size());
  Satoshi assigned = 0;
  for (std::size_t i = 0; i < shares.size(); ++i) {
    u128 scaled = static_cast<u128>(total) * shares[i];
    parts[i] = static_cast<Satoshi>(scaled / sum);
    remainder[i] = scaled % sum;
    assigned += parts[i];
  }
  std::vector<std::size_t> order(shares.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < total; ++k, ++assigned) ++parts[order[k]];
  return parts;
}

TransactionTransfers transaction_transfers(const TransactionRecord& record,
                                           const ClusterMap* clusters, PairingRule pairing) {
  struct Holding {
    std::string node;
    Satoshi value;
  };
  auto node_of = [clusters](const std::string& address) {
    return clusters ? std::string(clusters->representative(address)) : address;
  };
  auto collapse = [&](const std::vector<TxEntry>& entries) {
    std::vector<Holding> out;
    StringMap<std::size_t> slot;
    for (const auto& e : entries) {
      auto node = node_of(e.address);
      auto [it, inserted] = slot.try_emplace(node, out.size());
      if (inserted)
        out.push_back(Holding{std::move(node), e.value});
      else
        out[it->second].value += e.value;
    }
    return out;
  };

  TransactionTransfers result;
  const auto inputs = collapse(record.inputs);
  const auto outputs = collapse(record.outputs);
  StringMap<bool> seen;
  for (const auto* side : {&inputs, &outputs})
    for (const auto& h : *side)
      if (seen.try_emplace(h.node, true).second) result.nodes.push_back(h.node);
  if (inputs.empty()) return result;

  std::vector<Satoshi> shares(inputs.size(), 1);
  if (pairing == PairingRule::proportional)
    for (std::size_t i = 0; i < inputs.size(); ++i) shares[i] = inputs[i].value;

  for (const auto& out : outputs) {
    const auto parts = apportion(out.value, shares);
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      if (parts[i] == 0) continue;
      if (inputs[i].node == out.node)
        result.self_loop_value += parts[i];
      else
        result.transfers.push_back(Transfer{inputs[i].node, out.node, parts[i]});
    }
  }
  return result;
}

BuildResult build_graph(std::span<const TransactionRecord> records, const BuildOptions& options) {
  GraphBuilder builder;
  BuildStats stats;
  for (const auto& rec : records) {
    if (options.window && !(rec.timestamp && options.window->contains(*rec.timestamp))) {
      ++stats.transactions_outside_window;
      continue;
    }
    ++stats.transactions_used;
    if (rec.inputs.empty()) ++stats.coinbase_transactions;
    auto tt = transaction_transfers(rec, options.clusters, options.pairing);
    for (const auto& node : tt.nodes) builder.add_node(node);
    for (const auto& t : tt.transfers) builder.add_transfer(t.src, t.dst, t.value);
    stats.transfers += tt.transfers.size();
    stats.self_loop_value += tt.self_loop_value;
  }
  return BuildResult{builder.finalize(), stats};
}

}  // namespace taintrank
