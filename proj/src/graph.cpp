#include "dynopt/graph.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <utility>

#include "dynopt/errors.hpp"

namespace dynopt {

WeightedGraph::WeightedGraph(std::size_t n, std::vector<Edge> edges, bool directed)
    : n_(n), edges_(std::move(edges)), directed_(directed) {
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& e : edges_) {
    if (e.i >= n_ || e.j >= n_) {
      throw ValidationError("edge (" + std::to_string(e.i) + ", " + std::to_string(e.j) +
                            ") references a node outside 0.." + std::to_string(n_ == 0 ? 0 : n_ - 1));
    }
    if (e.i == e.j) throw ValidationError("self-loop on node " + std::to_string(e.i));
    if (!std::isfinite(e.w)) throw ValidationError("non-finite edge weight");
    if (e.w < 0.0) throw ValidationError("negative edge weight " + std::to_string(e.w));
    if (e.w == 0.0) throw ValidationError("zero edge weight (a zero entry means no edge)");
    auto key = directed_ ? std::pair{e.i, e.j} : std::pair{std::min(e.i, e.j), std::max(e.i, e.j)};
    if (!seen.insert(key).second) {
      throw ValidationError("duplicate edge (" + std::to_string(e.i) + ", " + std::to_string(e.j) + ")");
    }
  }
}

Eigen::MatrixXd WeightedGraph::adjacency() const {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
  for (const auto& e : edges_) {
    w(e.i, e.j) = e.w;
    if (!directed_) w(e.j, e.i) = e.w;
  }
  return w;
}

Eigen::VectorXd WeightedGraph::degrees() const {
  Eigen::VectorXd d = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_));
  for (const auto& e : edges_) {
    d(e.i) += e.w;
    if (!directed_) d(e.j) += e.w;
  }
  return d;
}

double WeightedGraph::total_weight() const {
  double s = 0.0;
  for (const auto& e : edges_) s += e.w;
  return s;
}

std::vector<std::vector<std::size_t>> WeightedGraph::neighbours() const {
  std::vector<std::vector<std::size_t>> adj(n_);
  for (const auto& e : edges_) {
    adj[e.i].push_back(e.j);
    if (!directed_) adj[e.j].push_back(e.i);
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());
  return adj;
}

std::size_t connected_components(const WeightedGraph& g) {
  std::vector<std::size_t> parent(g.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& e : g.edges()) parent[find(e.i)] = find(e.j);
  std::size_t count = 0;
  for (std::size_t v = 0; v < g.size(); ++v) count += find(v) == v;
  return count;
}

GraphFormat parse_graph_format(std::string_view name) {
  if (name == "edge-list" || name == "edgelist" || name == "el") return GraphFormat::EdgeList;
  if (name == "matrix-market" || name == "mtx" || name == "mm") return GraphFormat::MatrixMarket;
  if (name == "rudy" || name == "gset") return GraphFormat::Rudy;
  throw ValidationError("unknown graph format '" + std::string(name) + "'");
}

std::string_view to_string(GraphFormat f) {
  switch (f) {
    case GraphFormat::EdgeList: return "edge-list";
    case GraphFormat::MatrixMarket: return "matrix-market";
    case GraphFormat::Rudy: return "rudy";
  }
  return "unknown";
}

namespace {

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

long long parse_int(std::string_view tok, std::size_t line) {
  long long v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || p != tok.data() + tok.size()) {
    throw ParseError("expected an integer, got '" + std::string(tok) + "'", line);
  }
  return v;
}

double parse_real(std::string_view tok, std::size_t line) {
  double v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || p != tok.data() + tok.size()) {
    throw ParseError("expected a number, got '" + std::string(tok) + "'", line);
  }
  return v;
}

struct RawEdge {
  long long i, j;
  double w;
  std::size_t line;
};

WeightedGraph read_edge_list(std::istream& in) {
  std::vector<RawEdge> raw;
  std::string buf;
  std::size_t line = 0;
  while (std::getline(in, buf)) {
    ++line;
    std::string_view s(buf);
    if (auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    auto tok = split_ws(s);
    if (tok.empty()) continue;
    if (tok.size() != 2 && tok.size() != 3) throw ParseError("expected 'i j [w]'", line);
    RawEdge e{parse_int(tok[0], line), parse_int(tok[1], line), tok.size() == 3 ? parse_real(tok[2], line) : 1.0,
              line};
    if (e.i < 0 || e.j < 0) throw ParseError("negative node id", line);
    raw.push_back(e);
  }
  // remap ids (0- or 1-based, possibly sparse) onto 0..n-1 preserving order
  std::map<long long, std::size_t> ids;
  for (const auto& e : raw) {
    ids.emplace(e.i, 0);
    ids.emplace(e.j, 0);
  }
  std::size_t next = 0;
  for (auto& [id, dense] : ids) dense = next++;
  std::vector<Edge> edges;
  edges.reserve(raw.size());
  for (const auto& e : raw) edges.push_back({ids[e.i], ids[e.j], e.w});
  return WeightedGraph(ids.size(), std::move(edges));
}

WeightedGraph read_rudy(std::istream& in) {
  std::string buf;
  std::size_t line = 0;
  long long n = -1, m = -1;
  std::vector<Edge> edges;
  while (std::getline(in, buf)) {
    ++line;
    std::string_view s(buf);
    if (auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    auto tok = split_ws(s);
    if (tok.empty()) continue;
    if (n < 0) {
      if (tok.size() != 2) throw ParseError("expected header 'n m'", line);
      n = parse_int(tok[0], line);
      m = parse_int(tok[1], line);
      if (n <= 0 || m < 0) throw ParseError("invalid header counts", line);
      edges.reserve(static_cast<std::size_t>(m));
      continue;
    }
    if (tok.size() != 3) throw ParseError("expected 'i j w'", line);
    long long i = parse_int(tok[0], line), j = parse_int(tok[1], line);
    if (i < 1 || j < 1 || i > n || j > n) throw ParseError("node id outside 1..n", line);
    edges.push_back({static_cast<std::size_t>(i - 1), static_cast<std::size_t>(j - 1), parse_real(tok[2], line)});
  }
  if (n < 0) throw ParseError("missing header");
  if (static_cast<long long>(edges.size()) != m) {
    throw ParseError("header declares " + std::to_string(m) + " edges, found " + std::to_string(edges.size()));
  }
  return WeightedGraph(static_cast<std::size_t>(n), std::move(edges));
}

WeightedGraph read_matrix_market(std::istream& in) {
  std::string buf;
  std::size_t line = 0;
  if (!std::getline(in, buf)) throw ParseError("empty file");
  ++line;
  auto head = split_ws(buf);
  auto lower = [](std::string_view v) {
    std::string s(v);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
  };
  if (head.size() != 5 || lower(head[0]) != "%%matrixmarket" || lower(head[1]) != "matrix" ||
      lower(head[2]) != "coordinate") {
    throw ParseError("expected '%%MatrixMarket matrix coordinate <field> <symmetry>'", line);
  }
  const std::string field = lower(head[3]);
  const std::string symmetry = lower(head[4]);
  if (field != "real" && field != "integer" && field != "pattern") {
    throw UnsupportedError("matrix-market field '" + field + "' not supported");
  }
  if (symmetry != "symmetric") throw UnsupportedError("only symmetric matrix-market graphs are supported");
  const bool pattern = field == "pattern";

  long long rows = -1, nnz = -1;
  std::vector<Edge> edges;
  while (std::getline(in, buf)) {
    ++line;
    std::string_view s(buf);
    if (!s.empty() && s.front() == '%') continue;
    auto tok = split_ws(s);
    if (tok.empty()) continue;
    if (rows < 0) {
      if (tok.size() != 3) throw ParseError("expected size line 'rows cols nnz'", line);
      rows = parse_int(tok[0], line);
      long long cols = parse_int(tok[1], line);
      nnz = parse_int(tok[2], line);
      if (rows <= 0 || rows != cols || nnz < 0) throw ParseError("invalid or non-square size line", line);
      continue;
    }
    if (tok.size() != (pattern ? 2u : 3u)) throw ParseError("malformed entry", line);
    long long i = parse_int(tok[0], line), j = parse_int(tok[1], line);
    if (i < 1 || j < 1 || i > rows || j > rows) throw ParseError("entry index outside matrix", line);
    double w = pattern ? 1.0 : parse_real(tok[2], line);
    edges.push_back({static_cast<std::size_t>(i - 1), static_cast<std::size_t>(j - 1), w});
  }
  if (rows < 0) throw ParseError("missing size line");
  if (static_cast<long long>(edges.size()) != nnz) {
    throw ParseError("size line declares " + std::to_string(nnz) + " entries, found " + std::to_string(edges.size()));
  }
  return WeightedGraph(static_cast<std::size_t>(rows), std::move(edges));
}

}  // namespace

WeightedGraph read_graph(std::istream& in, GraphFormat format) {
  switch (format) {
    case GraphFormat::EdgeList: return read_edge_list(in);
    case GraphFormat::MatrixMarket: return read_matrix_market(in);
    case GraphFormat::Rudy: return read_rudy(in);
  }
  throw UnsupportedError("unknown graph format");
}

WeightedGraph load_graph(const std::filesystem::path& path, GraphFormat format) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open graph file '" + path.string() + "'");
  return read_graph(in, format);
}

}  // namespace dynopt
