#pragma once

#include <array>
#include <string>
#include <vector>

#include "tensor.hpp"

namespace gvpnn {

struct AtomRecord {
  std::string element;
  std::array<double, 3> pos;  // Angstrom
  bool readout_tag = false;
};

// Recognized element symbols plus an implicit trailing "other" bucket.
class ElementVocab {
 public:
  explicit ElementVocab(std::vector<std::string> symbols);
  static ElementVocab default_vocab();

  // Index into the one-hot encoding; unknown symbols land in the last slot.
  int index_of(const std::string& symbol) const;
  int onehot_width() const { return int(symbols_.size()) + 1; }
  const std::vector<std::string>& symbols() const { return symbols_; }
  bool operator==(const ElementVocab& o) const { return symbols_ == o.symbols_; }

 private:
  std::vector<std::string> symbols_;
};

struct GraphEdge {
  int src = 0;
  int dst = 0;
  double dist = 0.0;
  std::array<double, 3> unit{};  // direction src -> dst
  std::vector<double> rbf;
};

// Atomic radius graph with one-hot node features and unit-vector + RBF edge
// features. Edges are directed, both directions present, sorted by (src, dst).
struct MolGraph {
  std::vector<AtomRecord> atoms;
  ElementVocab vocab = ElementVocab::default_vocab();
  double cutoff = 4.5;
  int rbf_count = 16;
  std::vector<int> element_index;  // per atom, into the one-hot
  std::vector<GraphEdge> edges;

  int num_nodes() const { return int(atoms.size()); }
  int num_edges() const { return int(edges.size()); }
  Tensor node_onehot(int i) const;
  Tensor edge_unit_tensor(int e) const;   // 1 x 3
  Tensor edge_scalar_tensor(int e) const; // rbf_count x 1
};

// XYZ text: line 1 atom count, line 2 comment, then "symbol x y z" rows with
// an optional fifth column "1" marking the readout tag.
std::vector<AtomRecord> parse_xyz(const std::string& text);

// Removes H atoms (case-insensitive exact symbol), preserving order.
std::vector<AtomRecord> strip_hydrogens(std::vector<AtomRecord> atoms);

// All directed pairs with Euclidean distance strictly below cutoff, sorted by
// (src, dst). Grid-accelerated; tests compare against the O(N^2) scan.
std::vector<std::pair<int, int>> build_radius_graph(const std::vector<AtomRecord>& atoms,
                                                    double cutoff = 4.5);

// Gaussian RBF encoding of a distance: centers evenly spaced on
// [d_min, d_max], gamma = (d_max - d_min) / count.
std::vector<double> rbf_encode(double d, double d_min = 0.0, double d_max = 4.5, int count = 16);

MolGraph featurize(std::vector<AtomRecord> atoms, ElementVocab vocab, double cutoff = 4.5,
                   int rbf_count = 16);

// Native JSON graph format, version 1. Positions are authoritative; edges are
// recomputed on load.
std::string graph_to_json(const MolGraph& graph);
MolGraph graph_from_json(const std::string& json_text);
void save_graph(const MolGraph& graph, const std::string& path);
MolGraph load_graph(const std::string& path);

}  // namespace gvpnn
