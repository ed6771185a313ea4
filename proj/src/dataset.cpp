#include "dyadic/dataset.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "dyadic/error.hpp"

namespace dyadic {

DyadicDataset::DyadicDataset(std::size_t n, std::vector<double> values,
                             std::vector<std::uint8_t> present,
                             std::vector<std::string> labels)
    : n_(n), values_(std::move(values)), present_(std::move(present)),
      labels_(std::move(labels)) {
  if (n_ < 2) throw InputError("a dyadic dataset needs at least 2 nodes");
  const std::size_t pairs = n_ * (n_ - 1) / 2;
  if (values_.size() != pairs || present_.size() != pairs) {
    throw InputError("expected " + std::to_string(pairs) +
                     " pair slots for n = " + std::to_string(n_));
  }
  if (n_ > std::numeric_limits<std::uint32_t>::max()) {
    throw InputError("too many nodes");
  }
  if (labels_.empty()) {
    labels_.reserve(n_);
    for (std::size_t i = 0; i < n_; ++i) labels_.push_back(std::to_string(i + 1));
  } else if (labels_.size() != n_) {
    throw InputError("label count does not match node count");
  }

  std::size_t k = 0;
  for (std::size_t i = 0; i + 1 < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j, ++k) {
      if (!present_[k]) {
        values_[k] = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      if (!std::isfinite(values_[k])) {
        throw InputError("non-finite value for present pair (" + labels_[i] +
                         ", " + labels_[j] + ")");
      }
      pairs_.first.push_back(static_cast<std::uint32_t>(i));
      pairs_.second.push_back(static_cast<std::uint32_t>(j));
      pairs_.values.push_back(values_[k]);
    }
  }
}

DyadicDataset DyadicDataset::complete(std::size_t n, std::vector<double> values) {
  std::vector<std::uint8_t> mask(values.size(), 1);
  return DyadicDataset(n, std::move(values), std::move(mask));
}

double DyadicDataset::mixture_weight() const {
  return static_cast<double>(present_count()) / static_cast<double>(pair_count());
}

std::size_t DyadicDataset::pair_index(std::size_t i, std::size_t j, std::size_t n) {
  if (i > j) std::swap(i, j);
  return i * n - i * (i + 1) / 2 + (j - i - 1);
}

bool DyadicDataset::present(std::size_t i, std::size_t j) const {
  if (i == j || i >= n_ || j >= n_) throw InputError("invalid pair index");
  return present_[pair_index(i, j, n_)] != 0;
}

double DyadicDataset::value(std::size_t i, std::size_t j) const {
  if (i == j || i >= n_ || j >= n_) throw InputError("invalid pair index");
  return values_[pair_index(i, j, n_)];
}

DyadicDataset DyadicDataset::permuted(std::span<const std::size_t> permutation) const {
  if (permutation.size() != n_) throw InputError("permutation size mismatch");
  std::vector<double> values(values_.size());
  std::vector<std::uint8_t> mask(present_.size());
  std::vector<std::string> labels(n_);
  for (std::size_t i = 0; i < n_; ++i) labels[permutation[i]] = labels_[i];
  for (std::size_t i = 0; i + 1 < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j) {
      const std::size_t from = pair_index(i, j, n_);
      const std::size_t to = pair_index(permutation[i], permutation[j], n_);
      values[to] = values_[from];
      mask[to] = present_[from];
    }
  }
  return DyadicDataset(n_, std::move(values), std::move(mask), std::move(labels));
}

DyadicDataset from_edge_list(std::span<const EdgeRecord> records) {
  std::unordered_map<std::string, std::size_t> ids;
  std::vector<std::string> labels;
  auto densify = [&](const std::string& label) {
    auto [it, inserted] = ids.try_emplace(label, labels.size());
    if (inserted) labels.push_back(label);
    return it->second;
  };
  struct Indexed {
    std::size_t i, j;
    std::optional<double> value;
  };
  std::vector<Indexed> indexed;
  indexed.reserve(records.size());
  for (const auto& r : records) {
    if (r.i == r.j) throw InputError("self-loop on node " + r.i);
    const std::size_t i = densify(r.i);
    const std::size_t j = densify(r.j);
    if (r.value && !std::isfinite(*r.value)) {
      throw InputError("non-finite value for pair (" + r.i + ", " + r.j +
                       ") not flagged missing");
    }
    indexed.push_back({i, j, r.value});
  }
  const std::size_t n = labels.size();
  if (n < 2) throw InputError("edge list names fewer than 2 nodes");

  const std::size_t pairs = n * (n - 1) / 2;
  std::vector<double> values(pairs, std::numeric_limits<double>::quiet_NaN());
  std::vector<std::uint8_t> mask(pairs, 0);
  std::vector<std::uint8_t> seen(pairs, 0);
  for (const auto& e : indexed) {
    const std::size_t k = DyadicDataset::pair_index(e.i, e.j, n);
    if (seen[k]) {
      throw InputError("duplicate record for pair (" + labels[e.i] + ", " +
                       labels[e.j] + ")");
    }
    seen[k] = 1;
    if (e.value) {
      values[k] = *e.value;
      mask[k] = 1;
    }
  }
  return DyadicDataset(n, std::move(values), std::move(mask), std::move(labels));
}

std::optional<double> trade_volume(double flow_ij, double flow_ji) {
  if (!(flow_ij >= 0.0) || !(flow_ji >= 0.0)) {
    throw InputError("trade flows must be non-negative");
  }
  const double total = flow_ij + flow_ji;
  if (total == 0.0) return std::nullopt;
  if (!std::isfinite(total)) throw InputError("trade flow is not finite");
  return std::log(total);
}

NetworkSummary summary(const DyadicDataset& dataset) {
  const std::size_t n = dataset.n();
  NetworkSummary s;
  s.nodes = n;
  s.edges = dataset.present_count();
  s.edge_density = 2.0 * static_cast<double>(s.edges) /
                   (static_cast<double>(n) * static_cast<double>(n - 1));
  s.average_degree = 2.0 * static_cast<double>(s.edges) / static_cast<double>(n);
  if (n < 3) return s;

  // Bitset adjacency; triangles through popcount of row intersections.
  const std::size_t words = (n + 63) / 64;
  std::vector<std::uint64_t> adjacency(n * words, 0);
  std::vector<std::size_t> degree(n, 0);
  const auto& pairs = dataset.present_pairs();
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const std::size_t i = pairs.first[k];
    const std::size_t j = pairs.second[k];
    adjacency[i * words + j / 64] |= std::uint64_t{1} << (j % 64);
    adjacency[j * words + i / 64] |= std::uint64_t{1} << (i % 64);
    ++degree[i];
    ++degree[j];
  }
  // Each triangle is counted once per edge, i.e. three times.
  std::uint64_t closed = 0;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const std::uint64_t* a = &adjacency[pairs.first[k] * words];
    const std::uint64_t* b = &adjacency[pairs.second[k] * words];
    for (std::size_t w = 0; w < words; ++w) closed += std::popcount(a[w] & b[w]);
  }
  double triples = 0.0;
  for (std::size_t d : degree) {
    triples += 0.5 * static_cast<double>(d) * static_cast<double>(d > 0 ? d - 1 : 0);
  }
  s.clustering_coefficient = triples > 0.0 ? static_cast<double>(closed) / triples : 0.0;
  return s;
}

DyadicDataset finite_subsample(const DyadicDataset& dataset) {
  if (dataset.present_count() == 0) {
    throw DegenerateInputError("no present (finite) pairs in the dataset");
  }
  return DyadicDataset(dataset.n(),
                       std::vector<double>(dataset.values().begin(), dataset.values().end()),
                       std::vector<std::uint8_t>(dataset.mask().begin(), dataset.mask().end()),
                       dataset.labels());
}

}  // namespace dyadic
