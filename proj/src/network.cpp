#include "liftcert/network.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <unordered_map>

#include "liftcert/errors.hpp"

namespace liftcert {

std::vector<int> EdgeSlotMap::slots_of_edge(int k, int edge) const {
  std::vector<int> out;
  const auto& layer = per_layer_.at(k);
  for (std::size_t j = 0; j < layer.size(); ++j) {
    if (layer[j] && layer[j]->edge == edge) out.push_back(static_cast<int>(j) + 1);
  }
  return out;
}

std::optional<int> PathIndex::find(std::span<const int> edges) const {
  for (std::size_t i = 0; i < paths_.size(); ++i) {
    if (std::equal(edges.begin(), edges.end(), paths_[i].edges.begin(), paths_[i].edges.end())) {
      return static_cast<int>(i);
    }
  }
  return std::nullopt;
}

int NetworkTopology::layer_slot_count(int k) const {
  int total = 0;
  for (int e : layer_edges(k)) total += static_cast<int>(edges_[e].support.size());
  return total;
}

std::optional<int> NetworkTopology::path_of(const MultiIndex& i) const {
  if (static_cast<int>(i.size()) != K_) throw ShapeError("multi-index length differs from K");
  std::vector<int> seq(K_);
  for (int k = 0; k < K_; ++k) {
    const auto& target = slot_map_.at(k, i[k]);
    if (!target) return std::nullopt;
    seq[k] = target->edge;
  }
  for (int k = 1; k < K_; ++k) {
    if (edges_[seq[k]].to != edges_[seq[k - 1]].from) return std::nullopt;
  }
  return paths_.find(seq);
}

RawTopology NetworkTopology::raw() const {
  RawTopology r;
  r.N = N_;
  bool padded = false;
  for (int k = 1; k <= K_; ++k) padded = padded || layer_slot_count(k) != S_;
  if (padded) r.S = S_;
  r.nodes = nodes_;
  r.root = nodes_[root_];
  for (int f : leaves_) r.leaves.push_back(nodes_[f]);
  for (const auto& e : edges_) r.edges.push_back({nodes_[e.from], nodes_[e.to], e.support});
  return r;
}

NetworkTopology validate_topology(const RawTopology& raw) {
  if (raw.N < 1) throw TopologyError("signal length N must be >= 1");
  NetworkTopology t;
  t.N_ = raw.N;
  t.nodes_ = raw.nodes;

  std::unordered_map<std::string, int> id;
  for (std::size_t i = 0; i < raw.nodes.size(); ++i) {
    if (raw.nodes[i].empty()) throw TopologyError("node names must be nonempty");
    if (!id.emplace(raw.nodes[i], static_cast<int>(i)).second) {
      throw TopologyError("duplicate node '" + raw.nodes[i] + "'");
    }
  }
  auto lookup = [&](const std::string& name, const char* what) {
    auto it = id.find(name);
    if (it == id.end()) throw TopologyError(std::string(what) + " '" + name + "' is not a node");
    return it->second;
  };
  t.root_ = lookup(raw.root, "root");
  std::set<int> leaf_set;
  for (const auto& name : raw.leaves) {
    int f = lookup(name, "leaf");
    if (!leaf_set.insert(f).second) throw TopologyError("duplicate leaf '" + name + "'");
    t.leaves_.push_back(f);
  }
  if (t.leaves_.empty()) throw TopologyError("topology needs at least one leaf");

  const int n_nodes = static_cast<int>(raw.nodes.size());
  std::vector<std::vector<int>> out_edges(n_nodes), in_edges(n_nodes);
  for (std::size_t ei = 0; ei < raw.edges.size(); ++ei) {
    const auto& re = raw.edges[ei];
    NetworkTopology::Edge e;
    e.from = lookup(re.from, "edge source");
    e.to = lookup(re.to, "edge target");
    if (e.from == e.to) throw TopologyError("self-loop on node '" + re.from + "'");
    e.support = re.support;
    std::sort(e.support.begin(), e.support.end());
    if (e.support.empty()) {
      throw TopologyError("edge " + re.from + "->" + re.to + " has an empty kernel support");
    }
    if (std::adjacent_find(e.support.begin(), e.support.end()) != e.support.end()) {
      throw TopologyError("edge " + re.from + "->" + re.to + " repeats a support position");
    }
    if (e.support.front() < 0 || e.support.back() >= raw.N) {
      throw TopologyError("edge " + re.from + "->" + re.to + " support out of range {0.." +
                          std::to_string(raw.N - 1) + "}");
    }
    out_edges[e.from].push_back(static_cast<int>(ei));
    in_edges[e.to].push_back(static_cast<int>(ei));
    t.edges_.push_back(std::move(e));
  }

  // Topological order from the root side (Kahn on reversed edges).
  std::vector<int> pending(n_nodes);
  for (int v = 0; v < n_nodes; ++v) pending[v] = static_cast<int>(out_edges[v].size());
  std::vector<int> order;
  for (int v = 0; v < n_nodes; ++v) {
    if (pending[v] == 0) order.push_back(v);
  }
  for (std::size_t head = 0; head < order.size(); ++head) {
    for (int ei : in_edges[order[head]]) {
      if (--pending[t.edges_[ei].from] == 0) order.push_back(t.edges_[ei].from);
    }
  }
  if (static_cast<int>(order.size()) != n_nodes) throw TopologyError("topology contains a cycle");

  if (!out_edges[t.root_].empty()) throw TopologyError("root must not have outgoing edges");

  // All distances to the root; a node is well-placed iff it has exactly one.
  std::vector<std::set<int>> dist(n_nodes);
  dist[t.root_].insert(0);
  for (int v : order) {
    for (int ei : out_edges[v]) {
      for (int d : dist[t.edges_[ei].to]) dist[v].insert(d + 1);
    }
  }
  t.node_depth_.assign(n_nodes, -1);
  for (int v = 0; v < n_nodes; ++v) {
    if (dist[v].empty()) throw TopologyError("node '" + raw.nodes[v] + "' does not reach the root");
    if (dist[v].size() > 1) {
      throw TopologyError("ambiguous depth: node '" + raw.nodes[v] +
                          "' reaches the root by paths of different lengths");
    }
    t.node_depth_[v] = *dist[v].begin();
  }

  for (int v = 0; v < n_nodes; ++v) {
    bool is_source = in_edges[v].empty();
    if (is_source && !leaf_set.count(v)) {
      throw TopologyError("node '" + raw.nodes[v] + "' has no incoming edge but is not a leaf");
    }
    if (!is_source && leaf_set.count(v)) {
      throw TopologyError("leaf '" + raw.nodes[v] + "' has incoming edges");
    }
  }
  t.K_ = t.node_depth_[t.leaves_.front()];
  for (int f : t.leaves_) {
    if (t.node_depth_[f] != t.K_) {
      throw TopologyError("unequal path lengths: leaf '" + raw.nodes[f] + "' is at depth " +
                          std::to_string(t.node_depth_[f]) + ", expected " +
                          std::to_string(t.K_));
    }
  }
  if (t.K_ < 1) throw TopologyError("network needs at least one layer");

  t.nodes_at_depth_.assign(t.K_ + 1, {});
  for (int v = 0; v < n_nodes; ++v) {
    if (t.node_depth_[v] < t.K_) t.nodes_at_depth_[t.node_depth_[v]].push_back(v);
  }
  t.nodes_at_depth_[t.K_] = t.leaves_;

  t.layer_edges_.assign(t.K_, {});
  for (std::size_t ei = 0; ei < t.edges_.size(); ++ei) {
    auto& e = t.edges_[ei];
    e.depth = t.node_depth_[e.from];
    t.layer_edges_[e.depth - 1].push_back(static_cast<int>(ei));
  }

  std::vector<int> totals(t.K_);
  for (int k = 1; k <= t.K_; ++k) totals[k - 1] = t.layer_slot_count(k);
  const int max_total = *std::max_element(totals.begin(), totals.end());
  if (raw.S) {
    if (*raw.S < max_total) {
      throw TopologyError("declared S = " + std::to_string(*raw.S) +
                          " is smaller than a layer's kernel support total " +
                          std::to_string(max_total));
    }
    t.S_ = *raw.S;
    t.explicit_S_ = true;
  } else {
    for (int k = 1; k <= t.K_; ++k) {
      if (totals[k - 1] != totals[0]) {
        throw TopologyError("inconsistent slot totals: layer " + std::to_string(k) + " has " +
                            std::to_string(totals[k - 1]) + " kernel positions, layer 1 has " +
                            std::to_string(totals[0]));
      }
    }
    t.S_ = totals[0];
  }

  std::vector<std::vector<std::optional<SlotTarget>>> slots(t.K_);
  for (int k = 1; k <= t.K_; ++k) {
    auto& layer = slots[k - 1];
    layer.assign(t.S_, std::nullopt);
    int next = 0;
    for (int ei : t.layer_edges_[k - 1]) {
      for (int pos : t.edges_[ei].support) layer[next++] = SlotTarget{ei, pos};
    }
  }
  t.slot_map_ = EdgeSlotMap(std::move(slots));

  // Enumerate leaf-to-root paths depth-first in edge declaration order.
  std::vector<Path> paths;
  std::vector<std::vector<int>> by_leaf(t.leaves_.size());
  for (std::size_t fi = 0; fi < t.leaves_.size(); ++fi) {
    std::vector<int> stack_edges;
    auto walk = [&](auto&& self, int node) -> void {
      if (node == t.root_) {
        Path p;
        p.leaf = static_cast<int>(fi);
        p.edges.assign(stack_edges.rbegin(), stack_edges.rend());
        by_leaf[fi].push_back(static_cast<int>(paths.size()));
        paths.push_back(std::move(p));
        return;
      }
      for (int ei : out_edges[node]) {
        stack_edges.push_back(ei);
        self(self, t.edges_[ei].to);
        stack_edges.pop_back();
      }
    };
    walk(walk, t.leaves_[fi]);
  }
  t.paths_ = PathIndex(std::move(paths), std::move(by_leaf));
  return t;
}

std::vector<double> place_kernel(const NetworkTopology& topo, std::span<const double> h_k,
                                 int edge) {
  if (edge < 0 || edge >= static_cast<int>(topo.edges().size())) {
    throw std::out_of_range("edge index out of range");
  }
  if (static_cast<int>(h_k.size()) != topo.S()) throw ShapeError("layer parameters must have S entries");
  const int k = topo.edges()[edge].depth - 1;
  std::vector<double> kernel(topo.N(), 0.0);
  for (int slot = 1; slot <= topo.S(); ++slot) {
    const auto& target = topo.slot_map().at(k, slot);
    if (target && target->edge == edge) kernel[target->position] = h_k[slot - 1];
  }
  return kernel;
}

std::vector<double> circular_convolve(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("circular convolution needs equal lengths");
  const std::size_t n = a.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i] == 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) out[(i + j) % n] += a[i] * b[j];
  }
  return out;
}

Eigen::MatrixXd FactorMaps::factor(int k, std::span<const double> h_k) const {
  const auto& sl = slices_.at(k);
  if (h_k.size() != sl.size()) throw ShapeError("layer parameters must have S entries");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(sl.front().rows(), sl.front().cols());
  for (std::size_t j = 0; j < sl.size(); ++j) {
    if (h_k[j] != 0.0) m += h_k[j] * sl[j];
  }
  return m;
}

Eigen::MatrixXd FactorMaps::product(const ParamTuple& h) const {
  if (h.K() != K() || h.S() != S()) throw ShapeError("tuple shape differs from factor maps");
  Eigen::MatrixXd out = factor(0, h.factor(0));
  for (int k = 1; k < K(); ++k) out = out * factor(k, h.factor(k));
  return out;
}

FactorMaps build_factor_maps(const NetworkTopology& topo) {
  const int N = topo.N();
  std::vector<std::vector<Eigen::MatrixXd>> slices(topo.K());
  for (int k = 1; k <= topo.K(); ++k) {
    const auto& rows_nodes = topo.nodes_at_depth(k - 1);
    const auto& cols_nodes = topo.nodes_at_depth(k);
    auto block_of = [](const std::vector<int>& nodes, int v) {
      return static_cast<int>(std::find(nodes.begin(), nodes.end(), v) - nodes.begin());
    };
    auto& layer = slices[k - 1];
    layer.assign(topo.S(), Eigen::MatrixXd::Zero(N * static_cast<Eigen::Index>(rows_nodes.size()),
                                                 N * static_cast<Eigen::Index>(cols_nodes.size())));
    for (int slot = 1; slot <= topo.S(); ++slot) {
      const auto& target = topo.slot_map().at(k - 1, slot);
      if (!target) continue;
      const auto& e = topo.edges()[target->edge];
      const int r0 = N * block_of(rows_nodes, e.to);
      const int c0 = N * block_of(cols_nodes, e.from);
      // Circulant of the delta at `position`: out[n] += in[n - position].
      for (int n = 0; n < N; ++n) {
        layer[slot - 1](r0 + (n + target->position) % N, c0 + n) = 1.0;
      }
    }
  }
  return FactorMaps(N, std::move(slices));
}

std::vector<double> multiconv(const NetworkTopology& topo, const Path& p, const ParamTuple& h) {
  if (h.K() != topo.K() || h.S() != topo.S()) throw ShapeError("tuple shape differs from topology");
  if (static_cast<int>(p.edges.size()) != topo.K()) throw std::invalid_argument("invalid path");
  std::vector<double> acc = place_kernel(topo, h.factor(0), p.edges[0]);
  for (int k = 1; k < topo.K(); ++k) {
    acc = circular_convolve(acc, place_kernel(topo, h.factor(k), p.edges[k]));
  }
  return acc;
}

std::vector<double> multiconv(const NetworkTopology& topo, int path, const ParamTuple& h) {
  if (path < 0 || path >= static_cast<int>(topo.paths().size())) {
    throw std::invalid_argument("invalid path index");
  }
  return multiconv(topo, topo.paths()[path], h);
}

std::vector<double> apply_network(const NetworkTopology& topo, const ParamTuple& h,
                                  std::span<const double> x) {
  const int N = topo.N();
  if (h.K() != topo.K() || h.S() != topo.S()) throw ShapeError("tuple shape differs from topology");
  if (x.size() != static_cast<std::size_t>(N) * topo.leaves().size()) {
    throw ShapeError("input must have N * |leaves| entries");
  }
  std::vector<std::vector<double>> signal(topo.node_names().size());
  for (std::size_t f = 0; f < topo.leaves().size(); ++f) {
    signal[topo.leaves()[f]].assign(x.begin() + f * N, x.begin() + (f + 1) * N);
  }
  for (int k = topo.K(); k >= 1; --k) {
    for (int v : topo.nodes_at_depth(k - 1)) signal[v].assign(N, 0.0);
    for (int ei : topo.layer_edges(k)) {
      const auto& e = topo.edges()[ei];
      auto conv = circular_convolve(place_kernel(topo, h.factor(k - 1), ei), signal[e.from]);
      for (int n = 0; n < N; ++n) signal[e.to][n] += conv[n];
    }
  }
  return signal[topo.root()];
}

NetworkTopology haar_topology(int K, int N) {
  if (K < 1) throw std::invalid_argument("Haar depth must be >= 1");
  if (K > 20 || N < (1 << (K + 1))) {
    throw std::invalid_argument("Haar topology of depth " + std::to_string(K) +
                                " needs N >= 2^(K+1) = " + std::to_string(1L << (K + 1)));
  }
  RawTopology raw;
  raw.N = N;
  auto name = [](int d, int j) {
    return d == 0 ? std::string("r") : "n" + std::to_string(d) + "_" + std::to_string(j);
  };
  raw.root = "r";
  for (int d = 0; d <= K; ++d) {
    for (int j = 0; j < (1 << d); ++j) raw.nodes.push_back(name(d, j));
  }
  for (int j = 0; j < (1 << K); ++j) raw.leaves.push_back(name(K, j));
  for (int d = 1; d <= K; ++d) {
    for (int j = 0; j < (1 << d); ++j) {
      raw.edges.push_back({name(d, j), name(d - 1, j / 2), {0, 1 << d}});
    }
  }
  const int widest = 2 * (1 << K);
  if (K > 1) raw.S = widest;
  return validate_topology(raw);
}

NetworkTopology single_path_topology(int N, const std::vector<std::vector<int>>& supports) {
  const int K = static_cast<int>(supports.size());
  if (K < 1) throw std::invalid_argument("single-path topology needs at least one layer");
  RawTopology raw;
  raw.N = N;
  raw.root = "r";
  raw.nodes.push_back("r");
  for (int d = 1; d <= K; ++d) raw.nodes.push_back("n" + std::to_string(d));
  raw.leaves.push_back("n" + std::to_string(K));
  for (int d = 1; d <= K; ++d) {
    raw.edges.push_back({raw.nodes[d], raw.nodes[d - 1], supports[d - 1]});
  }
  return validate_topology(raw);
}

ParamTuple path_restriction(const ParamTuple& h, const NetworkTopology& topo, const Path& p) {
  if (h.K() != topo.K() || h.S() != topo.S()) throw ShapeError("tuple shape differs from topology");
  if (static_cast<int>(p.edges.size()) != topo.K()) throw std::invalid_argument("invalid path");
  std::vector<std::vector<double>> factors(topo.K());
  std::size_t width = 0;
  for (int k = 0; k < topo.K(); ++k) {
    const auto& e = topo.edges().at(p.edges[k]);
    if (e.depth != k + 1) throw std::invalid_argument("path edge has the wrong depth");
    for (int slot : topo.slot_map().slots_of_edge(k, p.edges[k])) {
      factors[k].push_back(h.factor(k)[slot - 1]);
    }
    width = std::max(width, factors[k].size());
  }
  for (auto& f : factors) f.resize(width, 0.0);
  return ParamTuple(std::move(factors));
}

Eigen::VectorXd flatten(const Eigen::MatrixXd& m) {
  return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

}  // namespace liftcert
