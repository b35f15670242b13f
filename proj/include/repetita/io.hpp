#pragma once

// Tabular topology / demand file formats and topology preprocessing.
//
// Topology file:
//   NODES <n>
//   label x y
//   <n node lines>
//   EDGES <m>
//   label src dest weight bw delay
//   <m edge lines>
// Demand file:
//   DEMANDS <k>
//   label src dest bw
//   <k demand lines>
// Tokens are whitespace separated, lines starting with '#' are comments and
// blank lines are ignored. An edge bandwidth of '-' means "unspecified".

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "repetita/core.hpp"

namespace repetita {

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

inline constexpr double kDefaultCapacityKbps = 1'000'000;

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j])))
      ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

// Reads significant lines (non-blank, non-comment) with their line numbers.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  bool next(std::vector<std::string_view>& tokens) {
    while (std::getline(in_, current_)) {
      ++line_;
      if (!current_.empty() && current_.back() == '\r') current_.pop_back();
      tokens = split_ws(current_);
      if (tokens.empty() || tokens.front().starts_with('#')) continue;
      return true;
    }
    return false;
  }

  int line() const { return line_; }

 private:
  std::istream& in_;
  std::string current_;
  int line_ = 0;
};

inline double parse_double(std::string_view tok, int line,
                           const char* field) {
  double value = 0;
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw ParseError(line, std::string("non-numeric ") + field + " '" +
                               std::string(tok) + "'");
  }
  return value;
}

inline std::int64_t parse_int(std::string_view tok, int line,
                              const char* field) {
  std::int64_t value = 0;
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(line, std::string("non-integer ") + field + " '" +
                               std::string(tok) + "'");
  }
  return value;
}

inline std::int64_t read_section_header(LineReader& reader,
                                        std::string_view keyword) {
  std::vector<std::string_view> tok;
  if (!reader.next(tok)) {
    throw ParseError(reader.line() + 1,
                     "missing '" + std::string(keyword) + "' header");
  }
  if (tok.size() != 2 || tok[0] != keyword) {
    throw ParseError(reader.line(), "malformed header, expected '" +
                                        std::string(keyword) + " <count>'");
  }
  std::int64_t count = parse_int(tok[1], reader.line(), "count");
  if (count < 0) throw ParseError(reader.line(), "negative count");
  // Column header line.
  if (!reader.next(tok)) {
    throw ParseError(reader.line() + 1, "missing column header");
  }
  return count;
}

inline bool is_section_header(const std::vector<std::string_view>& tok) {
  return tok.size() == 2 &&
         (tok[0] == "NODES" || tok[0] == "EDGES" || tok[0] == "DEMANDS");
}

inline NodeId parse_node_index(std::string_view tok, int line,
                               NodeId node_count) {
  std::int64_t v = parse_int(tok, line, "node index");
  if (v < 0 || v >= node_count) {
    throw ParseError(line, "dangling node index " + std::to_string(v));
  }
  return static_cast<NodeId>(v);
}

// Shortest decimal text that parses back to the same double.
inline std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace detail

inline Topology parse_topology(std::istream& in) {
  detail::LineReader reader(in);
  std::vector<std::string_view> tok;

  const std::int64_t node_count = detail::read_section_header(reader, "NODES");
  std::vector<Node> nodes;
  for (std::int64_t i = 0; i < node_count; ++i) {
    if (!reader.next(tok)) {
      throw ParseError(reader.line() + 1, "count mismatch: expected " +
                                              std::to_string(node_count) +
                                              " node lines");
    }
    if (detail::is_section_header(tok)) {
      throw ParseError(reader.line(), "count mismatch: expected " +
                                          std::to_string(node_count) +
                                          " node lines, found " +
                                          std::to_string(i));
    }
    if (tok.size() != 3) {
      throw ParseError(reader.line(), "node line needs 'label x y'");
    }
    nodes.push_back({std::string(tok[0]),
                     detail::parse_double(tok[1], reader.line(), "x"),
                     detail::parse_double(tok[2], reader.line(), "y")});
  }

  const std::int64_t edge_count = detail::read_section_header(reader, "EDGES");
  const auto n = static_cast<NodeId>(node_count);
  std::vector<Edge> edges;
  for (std::int64_t i = 0; i < edge_count; ++i) {
    if (!reader.next(tok)) {
      throw ParseError(reader.line() + 1, "count mismatch: expected " +
                                              std::to_string(edge_count) +
                                              " edge lines");
    }
    const int line = reader.line();
    if (tok.size() != 6) {
      throw ParseError(line, "edge line needs 'label src dest weight bw delay'");
    }
    Edge e;
    e.label = std::string(tok[0]);
    e.src = detail::parse_node_index(tok[1], line, n);
    e.dst = detail::parse_node_index(tok[2], line, n);
    if (e.src == e.dst) throw ParseError(line, "edge src equals dest");
    e.weight = detail::parse_int(tok[3], line, "weight");
    if (e.weight < 1) throw ParseError(line, "weight must be at least 1");
    if (tok[4] == "-") {
      e.capacity = 0;
    } else {
      e.capacity = detail::parse_double(tok[4], line, "bw");
      if (!(e.capacity > 0)) throw ParseError(line, "bw must be positive");
    }
    e.delay = detail::parse_double(tok[5], line, "delay");
    if (e.delay < 0) throw ParseError(line, "delay must be non-negative");
    edges.push_back(std::move(e));
  }
  if (reader.next(tok)) {
    throw ParseError(reader.line(), "count mismatch: unexpected line after " +
                                        std::to_string(edge_count) + " edges");
  }
  return Topology(std::move(nodes), std::move(edges));
}

inline Topology parse_topology(const std::string& text) {
  std::istringstream in(text);
  return parse_topology(in);
}

// Rows with the same (src, dst) are summed into the first one.
inline TrafficMatrix parse_demands(std::istream& in,
                                   std::optional<NodeId> node_count = {}) {
  detail::LineReader reader(in);
  std::vector<std::string_view> tok;
  const std::int64_t count = detail::read_section_header(reader, "DEMANDS");

  TrafficMatrix tm;
  std::map<std::pair<NodeId, NodeId>, std::size_t> index;
  for (std::int64_t i = 0; i < count; ++i) {
    if (!reader.next(tok)) {
      throw ParseError(reader.line() + 1, "count mismatch: expected " +
                                              std::to_string(count) +
                                              " demand lines");
    }
    const int line = reader.line();
    if (tok.size() != 4) {
      throw ParseError(line, "demand line needs 'label src dest bw'");
    }
    const NodeId limit = node_count.value_or(std::numeric_limits<NodeId>::max());
    Demand d;
    d.label = std::string(tok[0]);
    d.src = detail::parse_node_index(tok[1], line, limit);
    d.dst = detail::parse_node_index(tok[2], line, limit);
    if (d.src == d.dst) throw ParseError(line, "demand src equals dest");
    d.volume = detail::parse_double(tok[3], line, "bw");
    if (d.volume < 0) {
      throw ParseError(line, "negative volume in demand " + d.label);
    }
    auto [it, inserted] = index.emplace(std::pair{d.src, d.dst},
                                        tm.demands.size());
    if (inserted) {
      tm.demands.push_back(std::move(d));
    } else {
      tm.demands[it->second].volume += d.volume;
    }
  }
  if (reader.next(tok)) {
    throw ParseError(reader.line(), "count mismatch: unexpected line after " +
                                        std::to_string(count) + " demands");
  }
  return tm;
}

inline TrafficMatrix parse_demands(const std::string& text,
                                   std::optional<NodeId> node_count = {}) {
  std::istringstream in(text);
  return parse_demands(in, node_count);
}

inline void write_topology(std::ostream& out, const Topology& topo) {
  out << "NODES " << topo.node_count() << "\n";
  out << "label x y\n";
  for (const Node& n : topo.nodes()) {
    out << n.label << " " << detail::format_number(n.x) << " "
        << detail::format_number(n.y) << "\n";
  }
  out << "\n";
  out << "EDGES " << topo.edge_count() << "\n";
  out << "label src dest weight bw delay\n";
  for (const Edge& e : topo.edges()) {
    out << e.label << " " << e.src << " " << e.dst << " " << e.weight << " "
        << (e.capacity > 0 ? detail::format_number(e.capacity) : "-") << " "
        << detail::format_number(e.delay) << "\n";
  }
}

inline std::string write_topology(const Topology& topo) {
  std::ostringstream out;
  write_topology(out, topo);
  return out.str();
}

inline void write_demands(std::ostream& out, const TrafficMatrix& tm) {
  out << "DEMANDS " << tm.demands.size() << "\n";
  out << "label src dest bw\n";
  for (const Demand& d : tm.demands) {
    out << d.label << " " << d.src << " " << d.dst << " "
        << detail::format_number(d.volume) << "\n";
  }
}

inline std::string write_demands(const TrafficMatrix& tm) {
  std::ostringstream out;
  write_demands(out, tm);
  return out.str();
}

inline Topology read_topology_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open topology file " + path);
  return parse_topology(in);
}

inline TrafficMatrix read_demands_file(const std::string& path,
                                       std::optional<NodeId> node_count = {}) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open demands file " + path);
  return parse_demands(in, node_count);
}

// Strongly connected components (iterative Tarjan). Returns the component
// index of every node.
inline std::vector<int> strongly_connected_components(
    const Topology& topo, const std::vector<bool>* removed_edges = nullptr) {
  const NodeId n = topo.node_count();
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
  std::vector<bool> on_stack(n, false);
  std::vector<NodeId> stack;
  int next_index = 0;
  int next_comp = 0;

  struct Frame {
    NodeId node;
    std::size_t edge_pos;
  };
  for (NodeId root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    std::vector<Frame> call{{root, 0}};
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      Frame& f = call.back();
      const auto& out = topo.out_edges(f.node);
      if (f.edge_pos < out.size()) {
        EdgeId e = out[f.edge_pos++];
        if (removed_edges && (*removed_edges)[e]) continue;
        NodeId w = topo.edge(e).dst;
        if (index[w] == -1) {
          index[w] = low[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.node] = std::min(low[f.node], index[w]);
        }
        continue;
      }
      NodeId v = f.node;
      call.pop_back();
      if (!call.empty()) {
        low[call.back().node] = std::min(low[call.back().node], low[v]);
      }
      if (low[v] == index[v]) {
        NodeId w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = next_comp;
        } while (w != v);
        ++next_comp;
      }
    }
  }
  return comp;
}

inline bool is_strongly_connected(
    const Topology& topo, const std::vector<bool>* removed_edges = nullptr) {
  if (topo.node_count() == 0) return false;
  auto comp = strongly_connected_components(topo, removed_edges);
  return std::all_of(comp.begin(), comp.end(),
                     [&](int c) { return c == comp[0]; });
}

struct PreprocessResult {
  Topology topology;
  // Old node index -> new node index (nullopt when the node was dropped).
  std::vector<std::optional<NodeId>> node_map;
};

// Keeps the largest strongly connected component (ties: the component holding
// the lowest node index), fills missing capacities with the mean of the
// specified ones (or a default constant when none is specified) and raises
// every capacity to at least 1/20 of the largest one.
inline PreprocessResult preprocess_topology_with_map(const Topology& raw) {
  const NodeId n = raw.node_count();
  if (n == 0) throw std::invalid_argument("empty topology");
  auto comp = strongly_connected_components(raw);
  std::map<int, std::pair<int, NodeId>> stats;  // comp -> (size, min node)
  for (NodeId v = 0; v < n; ++v) {
    auto [it, inserted] = stats.emplace(comp[v], std::pair{0, v});
    it->second.first++;
  }
  int best = -1;
  std::pair<int, NodeId> best_stat{0, 0};
  for (const auto& [c, st] : stats) {
    if (best == -1 || st.first > best_stat.first ||
        (st.first == best_stat.first && st.second < best_stat.second)) {
      best = c;
      best_stat = st;
    }
  }

  PreprocessResult result;
  result.node_map.assign(n, std::nullopt);
  std::vector<Node> nodes;
  for (NodeId v = 0; v < n; ++v) {
    if (comp[v] != best) continue;
    result.node_map[v] = static_cast<NodeId>(nodes.size());
    nodes.push_back(raw.node(v));
  }
  std::vector<Edge> edges;
  for (const Edge& e : raw.edges()) {
    if (comp[e.src] != best || comp[e.dst] != best) continue;
    Edge copy = e;
    copy.src = *result.node_map[e.src];
    copy.dst = *result.node_map[e.dst];
    edges.push_back(std::move(copy));
  }

  double sum = 0;
  int specified = 0;
  for (const Edge& e : edges) {
    if (e.capacity > 0) {
      sum += e.capacity;
      ++specified;
    }
  }
  const double fill = specified == 0 ? kDefaultCapacityKbps : sum / specified;
  double max_capacity = 0;
  for (Edge& e : edges) {
    if (!(e.capacity > 0)) e.capacity = fill;
    max_capacity = std::max(max_capacity, e.capacity);
  }
  const double floor = max_capacity / 20;
  for (Edge& e : edges) {
    if (e.capacity < floor) e.capacity = floor;
  }
  result.topology = Topology(std::move(nodes), std::move(edges));
  return result;
}

inline Topology preprocess_topology(const Topology& raw) {
  return preprocess_topology_with_map(raw).topology;
}

// Drops demands whose endpoints were removed by preprocessing.
inline TrafficMatrix remap_demands(
    const TrafficMatrix& tm, const std::vector<std::optional<NodeId>>& map) {
  TrafficMatrix out;
  for (const Demand& d : tm.demands) {
    if (d.src < 0 || d.dst < 0 || d.src >= static_cast<NodeId>(map.size()) ||
        d.dst >= static_cast<NodeId>(map.size()))
      continue;
    if (!map[d.src] || !map[d.dst]) continue;
    Demand copy = d;
    copy.src = *map[d.src];
    copy.dst = *map[d.dst];
    out.demands.push_back(std::move(copy));
  }
  return out;
}

}  // namespace repetita
