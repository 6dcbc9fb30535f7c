#pragma once

// Convolutional linear networks on layered rooted DAGs.
//
// Node depth is the number of edges to the root; an edge from depth k to depth
// k-1 has depth k and belongs to layer k. Leaves sit at depth K. Every edge
// carries a circular convolution kernel of length N whose support is fixed.
// Layer k owns S parameter slots, assigned to its edges in declaration order
// and, within an edge, by ascending kernel position. Layers with fewer kernel
// positions than S keep their trailing slots inactive (not mapped to any edge).

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "liftcert/tensor.hpp"

namespace liftcert {

/// Unvalidated network description, as read from a topology file.
struct RawTopology {
  struct Edge {
    std::string from;
    std::string to;
    std::vector<int> support;  // 0-based kernel positions
  };
  int N = 0;
  /// Declared slots per layer; when absent every layer must have the same
  /// total kernel support size.
  std::optional<int> S;
  std::vector<std::string> nodes;
  std::string root;
  std::vector<std::string> leaves;
  std::vector<Edge> edges;
};

struct SlotTarget {
  int edge = -1;      // index into NetworkTopology::edges()
  int position = -1;  // kernel position in {0..N-1}
};

/// For each layer, slot (1..S) -> (edge, kernel position), or nothing for an
/// inactive slot.
class EdgeSlotMap {
 public:
  EdgeSlotMap() = default;
  explicit EdgeSlotMap(std::vector<std::vector<std::optional<SlotTarget>>> per_layer)
      : per_layer_(std::move(per_layer)) {}

  int K() const { return static_cast<int>(per_layer_.size()); }
  int S() const { return per_layer_.empty() ? 0 : static_cast<int>(per_layer_.front().size()); }
  /// k is 0-based, slot 1-based.
  const std::optional<SlotTarget>& at(int k, int slot) const {
    return per_layer_.at(k).at(slot - 1);
  }
  /// 1-based slots of layer k that feed `edge`, ascending.
  std::vector<int> slots_of_edge(int k, int edge) const;

 private:
  std::vector<std::vector<std::optional<SlotTarget>>> per_layer_;
};

/// A leaf-to-root path stored by depth: edges[k] is the depth-(k+1) edge.
struct Path {
  std::vector<int> edges;
  int leaf = -1;  // index into NetworkTopology::leaves()
  friend bool operator==(const Path&, const Path&) = default;
};

class PathIndex {
 public:
  PathIndex() = default;
  PathIndex(std::vector<Path> paths, std::vector<std::vector<int>> by_leaf)
      : paths_(std::move(paths)), by_leaf_(std::move(by_leaf)) {}

  const std::vector<Path>& paths() const { return paths_; }
  std::size_t size() const { return paths_.size(); }
  const Path& operator[](std::size_t i) const { return paths_.at(i); }
  /// Indices into paths() starting at leaf f.
  const std::vector<int>& by_leaf(int f) const { return by_leaf_.at(f); }
  /// Index of the path matching the edge sequence, if any.
  std::optional<int> find(std::span<const int> edges) const;

 private:
  std::vector<Path> paths_;
  std::vector<std::vector<int>> by_leaf_;
};

/// Validated, immutable topology.
class NetworkTopology {
 public:
  struct Edge {
    int from = -1;  // node index
    int to = -1;
    std::vector<int> support;  // sorted 0-based positions
    int depth = 0;
  };

  int N() const { return N_; }
  int K() const { return K_; }
  int S() const { return S_; }
  const std::vector<std::string>& node_names() const { return nodes_; }
  int root() const { return root_; }
  /// Node indices of the leaves, in declared order.
  const std::vector<int>& leaves() const { return leaves_; }
  const std::vector<Edge>& edges() const { return edges_; }
  int node_depth(int node) const { return node_depth_.at(node); }
  /// Nodes at depth d, in the order their signals are stacked (leaves use the
  /// declared leaf order, other depths the node declaration order).
  const std::vector<int>& nodes_at_depth(int d) const { return nodes_at_depth_.at(d); }
  /// Edges of layer k (1-based depth), in declaration order.
  const std::vector<int>& layer_edges(int k) const { return layer_edges_.at(k - 1); }
  /// Total kernel positions in layer k (1-based); at most S.
  int layer_slot_count(int k) const;
  const EdgeSlotMap& slot_map() const { return slot_map_; }
  const PathIndex& paths() const { return paths_; }
  /// Path p_i = (e_1(i_1), ..., e_K(i_K)) if it is a leaf-to-root path.
  std::optional<int> path_of(const MultiIndex& i) const;

  /// Reconstructs the canonical description (node names, declared S only when
  /// padding is needed).
  RawTopology raw() const;

 private:
  friend NetworkTopology validate_topology(const RawTopology& raw);

  int N_ = 0;
  int K_ = 0;
  int S_ = 0;
  bool explicit_S_ = false;
  std::vector<std::string> nodes_;
  int root_ = -1;
  std::vector<int> leaves_;
  std::vector<Edge> edges_;
  std::vector<int> node_depth_;
  std::vector<std::vector<int>> nodes_at_depth_;
  std::vector<std::vector<int>> layer_edges_;
  EdgeSlotMap slot_map_;
  PathIndex paths_;
};

/// Checks acyclicity, rootedness, unique depths, equal leaf depths, support
/// range and per-layer slot totals. Throws TopologyError.
NetworkTopology validate_topology(const RawTopology& raw);

/// Kernel of `edge` built from the layer parameters h_k (length S).
std::vector<double> place_kernel(const NetworkTopology& topo, std::span<const double> h_k,
                                 int edge);

/// Circular convolution modulo the common length.
std::vector<double> circular_convolve(std::span<const double> a, std::span<const double> b);

/// Linear maps h -> M_k(h), stored as one matrix per slot.
///
/// M_k(h) has N*|nodes at depth k-1| rows and N*|nodes at depth k| columns, so
/// m_1 = N and m_{K+1} = N*|leaves|.
class FactorMaps {
 public:
  FactorMaps() = default;
  FactorMaps(int N, std::vector<std::vector<Eigen::MatrixXd>> slices)
      : N_(N), slices_(std::move(slices)) {}

  int K() const { return static_cast<int>(slices_.size()); }
  int S() const { return slices_.empty() ? 0 : static_cast<int>(slices_.front().size()); }
  int N() const { return N_; }
  Eigen::Index rows(int k) const { return slices_.at(k).front().rows(); }
  Eigen::Index cols(int k) const { return slices_.at(k).front().cols(); }
  /// M_k(e_slot); k 0-based, slot 1-based.
  const Eigen::MatrixXd& slice(int k, int slot) const { return slices_.at(k).at(slot - 1); }

  /// M_k(h_k) for 0-based k.
  Eigen::MatrixXd factor(int k, std::span<const double> h_k) const;
  /// M_1(h_1) ... M_K(h_K), an N x N|leaves| matrix.
  Eigen::MatrixXd product(const ParamTuple& h) const;

 private:
  int N_ = 0;
  std::vector<std::vector<Eigen::MatrixXd>> slices_;
};

FactorMaps build_factor_maps(const NetworkTopology& topo);

/// K-fold circular convolution of the placed kernels along path p.
std::vector<double> multiconv(const NetworkTopology& topo, const Path& p, const ParamTuple& h);
std::vector<double> multiconv(const NetworkTopology& topo, int path, const ParamTuple& h);

/// Runs the network directly on concatenated leaf signals x (length N|leaves|),
/// returning the root signal.
std::vector<double> apply_network(const NetworkTopology& topo, const ParamTuple& h,
                                  std::span<const double> x);

/// Binary tree of depth K whose depth-k edges carry support {0, 2^k}.
/// Requires N >= 2^(K+1).
NetworkTopology haar_topology(int K, int N);

/// Chain root <- n1 <- ... <- leaf with the given per-depth supports
/// (supports[0] is the depth-1 edge).
NetworkTopology single_path_topology(int N, const std::vector<std::vector<int>>& supports);

/// Restriction of h to the slots feeding the edges of path p. Factor k holds
/// those slots in slot order, zero-padded to the longest edge on the path.
ParamTuple path_restriction(const ParamTuple& h, const NetworkTopology& topo, const Path& p);

/// Flattens a matrix column-major, the layout used for lifting columns.
Eigen::VectorXd flatten(const Eigen::MatrixXd& m);

}  // namespace liftcert
