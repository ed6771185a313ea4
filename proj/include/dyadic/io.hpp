#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "dyadic/counterfactual.hpp"
#include "dyadic/dataset.hpp"

namespace dyadic::io {

// `i,j,w` carries values directly; `i,j,flow_ij,flow_ji` carries directed
// flows that are folded into trade volumes.
enum class EdgeFormat { value, trade };

struct EdgeList {
  EdgeFormat format = EdgeFormat::value;
  std::vector<EdgeRecord> records;
};

// Empty, NA and -inf values mark a missing pair.
EdgeList parse_edge_list(std::istream& in);

// Throws InputError when `require_trade` is set and the file is not a flow
// table.
DyadicDataset load_edge_list(const std::filesystem::path& path, bool require_trade = false);

// `i,j,w` with node labels, NA for missing pairs, values in %.17g.
void write_edge_list(std::ostream& out, const DyadicDataset& dataset);

struct CovariateRecord {
  std::string node;
  std::string x0;
  std::string x1;
};

// Header `node,x0,x1`.
std::vector<CovariateRecord> parse_covariates(std::istream& in);

// Orders covariates by the dataset's nodes. Every node needs a row; rows
// for nodes outside the network are ignored.
CovariateSample join_covariates(const DyadicDataset& dataset,
                                const std::vector<CovariateRecord>& records);

CovariateSample load_covariates(const std::filesystem::path& path, const DyadicDataset& dataset);

// Writes to a sibling temporary file and renames it over `path`, so a
// failed write never leaves a partial file behind.
void write_atomically(const std::filesystem::path& path,
                      const std::function<void(std::ostream&)>& writer);

// %.17g, which round-trips every double.
std::string format_double(double value);

}  // namespace dyadic::io
