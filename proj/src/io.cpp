#include "dyadic/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <unordered_map>

#include "dyadic/error.hpp"

namespace dyadic::io {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> fields;
  while (true) {
    const auto comma = line.find(',');
    fields.emplace_back(trim(line.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return fields;
}

bool is_missing(std::string_view field) {
  return field.empty() || field == "NA" || field == "na" || field == "-inf" || field == "-Inf";
}

double parse_double(std::string_view field, std::size_t line) {
  double value = 0.0;
  const char* first = field.data();
  if (!field.empty() && field.front() == '+') ++first;
  const auto [end, ec] = std::from_chars(first, field.data() + field.size(), value);
  if (ec != std::errc() || end != field.data() + field.size()) {
    throw InputError("line " + std::to_string(line) + ": invalid number '" + std::string(field) +
                     "'");
  }
  return value;
}

bool read_row(std::istream& in, std::vector<std::string>& fields, std::size_t& line) {
  std::string text;
  while (std::getline(in, text)) {
    ++line;
    if (trim(text).empty()) continue;
    fields = split(text);
    return true;
  }
  return false;
}

std::ifstream open(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

EdgeList parse_edge_list(std::istream& in) {
  std::vector<std::string> fields;
  std::size_t line = 0;
  if (!read_row(in, fields, line)) throw InputError("edge list is empty");
  EdgeList list;
  if (fields == std::vector<std::string>{"i", "j", "w"}) {
    list.format = EdgeFormat::value;
  } else if (fields == std::vector<std::string>{"i", "j", "flow_ij", "flow_ji"}) {
    list.format = EdgeFormat::trade;
  } else {
    throw InputError("edge list header must be 'i,j,w' or 'i,j,flow_ij,flow_ji'");
  }
  const std::size_t width = list.format == EdgeFormat::value ? 3 : 4;
  while (read_row(in, fields, line)) {
    if (fields.size() != width) {
      throw InputError("line " + std::to_string(line) + ": expected " + std::to_string(width) +
                       " fields");
    }
    EdgeRecord record{fields[0], fields[1], std::nullopt};
    if (record.i.empty() || record.j.empty()) {
      throw InputError("line " + std::to_string(line) + ": empty node id");
    }
    if (list.format == EdgeFormat::value) {
      if (!is_missing(fields[2])) record.value = parse_double(fields[2], line);
    } else {
      const double forward = is_missing(fields[2]) ? 0.0 : parse_double(fields[2], line);
      const double backward = is_missing(fields[3]) ? 0.0 : parse_double(fields[3], line);
      record.value = trade_volume(forward, backward);
    }
    list.records.push_back(std::move(record));
  }
  return list;
}

DyadicDataset load_edge_list(const std::filesystem::path& path, bool require_trade) {
  auto in = open(path);
  const auto list = parse_edge_list(in);
  if (require_trade && list.format != EdgeFormat::trade) {
    throw InputError("trade mode needs an 'i,j,flow_ij,flow_ji' edge list");
  }
  return from_edge_list(list.records);
}

void write_edge_list(std::ostream& out, const DyadicDataset& dataset) {
  out << "i,j,w\n";
  const auto& labels = dataset.labels();
  for (std::size_t i = 0; i < dataset.n(); ++i) {
    for (std::size_t j = i + 1; j < dataset.n(); ++j) {
      out << labels[i] << ',' << labels[j] << ',';
      if (dataset.present(i, j)) {
        out << format_double(dataset.value(i, j));
      } else {
        out << "NA";
      }
      out << '\n';
    }
  }
}

std::vector<CovariateRecord> parse_covariates(std::istream& in) {
  std::vector<std::string> fields;
  std::size_t line = 0;
  if (!read_row(in, fields, line)) throw InputError("covariate file is empty");
  if (fields != std::vector<std::string>{"node", "x0", "x1"}) {
    throw InputError("covariate header must be 'node,x0,x1'");
  }
  std::vector<CovariateRecord> records;
  while (read_row(in, fields, line)) {
    if (fields.size() != 3) throw InputError("line " + std::to_string(line) + ": expected 3 fields");
    if (fields[0].empty() || fields[1].empty() || fields[2].empty()) {
      throw InputError("line " + std::to_string(line) + ": empty covariate field");
    }
    records.push_back({fields[0], fields[1], fields[2]});
  }
  return records;
}

CovariateSample join_covariates(const DyadicDataset& dataset,
                                const std::vector<CovariateRecord>& records) {
  std::unordered_map<std::string, const CovariateRecord*> by_node;
  for (const auto& r : records) {
    if (!by_node.emplace(r.node, &r).second) {
      throw InputError("duplicate covariate row for node " + r.node);
    }
  }
  std::vector<std::string> x0, x1;
  x0.reserve(dataset.n());
  x1.reserve(dataset.n());
  for (const auto& label : dataset.labels()) {
    const auto it = by_node.find(label);
    if (it == by_node.end()) throw InputError("no covariates for node " + label);
    x0.push_back(it->second->x0);
    x1.push_back(it->second->x1);
  }
  return CovariateSample::from_labels(x0, x1);
}

CovariateSample load_covariates(const std::filesystem::path& path, const DyadicDataset& dataset) {
  auto in = open(path);
  return join_covariates(dataset, parse_covariates(in));
}

void write_atomically(const std::filesystem::path& path,
                      const std::function<void(std::ostream&)>& writer) {
  auto temporary = path;
  temporary += ".partial";
  {
    std::ofstream out(temporary, std::ios::trunc);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    try {
      writer(out);
    } catch (...) {
      out.close();
      std::filesystem::remove(temporary);
      throw;
    }
    out.flush();
    if (!out) {
      out.close();
      std::filesystem::remove(temporary);
      throw InputError("failed writing '" + path.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(temporary, path, ec);
  if (ec) {
    std::filesystem::remove(temporary);
    throw InputError("cannot move output into place at '" + path.string() + "': " + ec.message());
  }
}

std::string format_double(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

}  // namespace dyadic::io
