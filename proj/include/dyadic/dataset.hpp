#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dyadic {

// One undirected edge record as read from an edge list. An empty `value`
// marks a missing edge (a -infinity trade volume, an NA entry).
struct EdgeRecord {
  std::string i;
  std::string j;
  std::optional<double> value;
};

// Present pairs in storage order, struct-of-arrays for the estimator loops.
struct PresentPairs {
  std::vector<std::uint32_t> first;
  std::vector<std::uint32_t> second;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
};

// Undirected dyadic sample on n nodes: one value W_ij per unordered pair
// i < j, stored upper-triangular row-major, with a presence mask. Nodes are
// 0-based internally; `labels()` maps them back to the ingested ids.
class DyadicDataset {
 public:
  DyadicDataset(std::size_t n, std::vector<double> values,
                std::vector<std::uint8_t> present,
                std::vector<std::string> labels = {});

  // Every pair present.
  static DyadicDataset complete(std::size_t n, std::vector<double> values);

  std::size_t n() const { return n_; }
  std::size_t pair_count() const { return values_.size(); }
  std::size_t present_count() const { return pairs_.size(); }

  // Fraction of pairs that are present; the weight of the continuous
  // component when missing edges are a point mass at -infinity.
  double mixture_weight() const;

  static std::size_t pair_index(std::size_t i, std::size_t j, std::size_t n);

  // Either orientation of (i, j) is accepted; i != j.
  bool present(std::size_t i, std::size_t j) const;
  double value(std::size_t i, std::size_t j) const;

  std::span<const double> values() const { return values_; }
  std::span<const std::uint8_t> mask() const { return present_; }
  const PresentPairs& present_pairs() const { return pairs_; }
  const std::vector<std::string>& labels() const { return labels_; }

  // Values of present pairs in storage order.
  std::vector<double> present_values() const { return pairs_.values; }

  // Relabels node i as permutation[i].
  DyadicDataset permuted(std::span<const std::size_t> permutation) const;

 private:
  std::size_t n_;
  std::vector<double> values_;
  std::vector<std::uint8_t> present_;
  std::vector<std::string> labels_;
  PresentPairs pairs_;
};

struct NetworkSummary {
  std::size_t nodes = 0;
  std::size_t edges = 0;
  double edge_density = 0.0;
  double average_degree = 0.0;
  double clustering_coefficient = 0.0;
};

// Node ids are densified in first-seen order. Self-loops, duplicate
// unordered pairs and non-finite values not flagged missing are rejected.
DyadicDataset from_edge_list(std::span<const EdgeRecord> records);

// log(flow_ij + flow_ji), or nullopt for a zero total (no trade).
std::optional<double> trade_volume(double flow_ij, double flow_ji);

// Density, degree and global transitivity of the present-edge graph.
NetworkSummary summary(const DyadicDataset& dataset);

// Same node set with missing slots canonicalized (NaN value, mask 0).
// Throws DegenerateInputError if no pair is present.
DyadicDataset finite_subsample(const DyadicDataset& dataset);

}  // namespace dyadic
