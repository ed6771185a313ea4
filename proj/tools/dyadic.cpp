// Command-line front end. Exit codes: 0 success, 1 usage, 2 input,
// 3 numerical.

#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dyadic/bandwidth.hpp"
#include "dyadic/counterfactual.hpp"
#include "dyadic/error.hpp"
#include "dyadic/inference.hpp"
#include "dyadic/io.hpp"
#include "dyadic/parallel.hpp"
#include "dyadic/simd.hpp"
#include "dyadic/simulation.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dyadic;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kInput = 2, kNumerical = 3 };

// Invalid flag or config values; reported with the usage exit code.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

// Runs a value parser, turning its InputError into a UsageError.
template <typename Fn>
auto as_usage(Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const InputError& e) {
    throw UsageError(e.what());
  }
}

struct Options {
  std::vector<std::string> inputs;
  std::string covariates;
  std::string domain = "-2,2";
  std::size_t grid = 50;
  std::string kernel = "epanechnikov";
  int p = 2;
  int p_prime = 4;
  double alpha = 0.05;
  std::size_t draws = 10000;
  std::uint64_t seed = 1;
  bool trade = false;
  bool ridge = false;
  std::string out;
  std::optional<double> bandwidth;
  std::string norm = "inf";
  unsigned threads = 0;
  // simulate / generate
  std::vector<std::string> pis;
  std::size_t n = 300;
  std::size_t reps = 500;
  bool full_scale = false;
};

Domain parse_domain(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw InputError("domain must be given as a,b");
  try {
    std::size_t used = 0;
    const std::string a = text.substr(0, comma);
    const std::string b = text.substr(comma + 1);
    Domain domain{std::stod(a, &used), 0.0};
    if (used != a.size()) throw InputError("bad domain");
    domain.upper = std::stod(b, &used);
    if (used != b.size()) throw InputError("bad domain");
    if (!(domain.upper > domain.lower)) throw InputError("domain needs a < b");
    return domain;
  } catch (const std::logic_error&) {
    throw InputError("domain must be given as a,b with a < b");
  }
}

RbcConfig rbc_config(const Options& o) {
  return as_usage([&] {
    RbcConfig config;
    config.p = o.p;
    config.p_prime = o.p_prime;
    config.alpha = o.alpha;
    config.draws = o.draws;
    config.grid_size = o.grid;
    config.family = parse_kernel_family(o.kernel);
    config.domain = parse_domain(o.domain);
    config.psd.ridge = o.ridge;
    config.validate();
    return config;
  });
}

const std::string& single_input(const Options& o) {
  if (o.inputs.size() != 1) throw UsageError("exactly one --input is required");
  return o.inputs.front();
}

fs::path sidecar_path(const fs::path& out) {
  auto path = out;
  path.replace_extension(".json");
  if (path == out) path += ".json";
  return path;
}

fs::path with_suffix(const fs::path& out, const std::string& suffix) {
  auto stem = out;
  stem.replace_extension();
  stem += suffix;
  return stem;
}

void write_json(const std::string& out, const json& document) {
  if (out.empty()) {
    std::cout << document.dump(2) << '\n';
    return;
  }
  io::write_atomically(out, [&](std::ostream& s) { s << document.dump(2) << '\n'; });
}

json echo(const Options& o) {
  json config{{"domain", o.domain}, {"grid", o.grid},       {"kernel", o.kernel},
              {"p", o.p},           {"p_prime", o.p_prime}, {"alpha", o.alpha},
              {"B", o.draws},       {"seed", o.seed},       {"trade", o.trade},
              {"ridge", o.ridge},   {"inputs", o.inputs}};
  if (!o.covariates.empty()) config["covariates"] = o.covariates;
  if (o.bandwidth) config["bandwidth"] = *o.bandwidth;
  return config;
}

json band_metadata(const RbcResult& r) {
  std::vector<std::size_t> flagged;
  for (std::size_t m = 0; m < r.band.zero_variance.size(); ++m) {
    if (r.band.zero_variance[m]) flagged.push_back(m);
  }
  return json{{"h", r.bandwidth.h},
              {"bandwidth_method", std::string(to_string(r.bandwidth.method))},
              {"rot_constant", r.bandwidth.constant},
              {"q_hat", r.band.q_hat},
              {"psd_objective", r.covariance.objective},
              {"psd_method", r.covariance.method},
              {"lipschitz_bound", r.covariance.lipschitz_bound},
              {"negative_raw_diagonal", r.raw_covariance.negative_diagonal.size()},
              {"zero_variance_points", flagged},
              {"present_pairs", r.estimate.present_pairs},
              {"mixture_weight", r.estimate.mixture_weight},
              {"kernel_order", r.estimate.spec.order}};
}

void write_band_csv(const fs::path& path, const UniformBand& band) {
  io::write_atomically(path, [&](std::ostream& s) {
    s << "w,fhat,lo,hi,se\n";
    for (std::size_t m = 0; m < band.grid.size(); ++m) {
      s << io::format_double(band.grid[m]) << ',' << io::format_double(band.center[m]) << ','
        << io::format_double(band.lower(m)) << ',' << io::format_double(band.upper(m)) << ','
        << io::format_double(band.se[m]) << '\n';
    }
  });
}

void require_out(const Options& o) {
  if (o.out.empty()) throw UsageError("--out is required");
}

int cmd_estimate(const Options& o) {
  require_out(o);
  const auto domain = as_usage([&] { return parse_domain(o.domain); });
  const auto family = as_usage([&] { return parse_kernel_family(o.kernel); });
  if (o.p < 2 || o.p % 2 != 0) throw UsageError("kernel order must be even and at least 2");
  const auto data = io::load_edge_list(single_input(o), o.trade);
  BandwidthSelection bandwidth;
  if (o.bandwidth) {
    bandwidth = {*o.bandwidth, BandwidthMethod::manual, 0.0, 0.0};
  } else {
    bandwidth = rot_bandwidth(data, family);
  }
  const KernelSpec spec{family, o.p, bandwidth.h, domain};
  const auto estimate = fhat(data, spec, EvaluationGrid::uniform(domain, o.grid));

  io::write_atomically(o.out, [&](std::ostream& s) {
    s << "w,fhat\n";
    for (std::size_t m = 0; m < estimate.grid.size(); ++m) {
      s << io::format_double(estimate.grid[m]) << ',' << io::format_double(estimate.values[m])
        << '\n';
    }
  });
  write_json(sidecar_path(o.out),
             json{{"command", "estimate"},
                  {"h", bandwidth.h},
                  {"bandwidth_method", std::string(to_string(bandwidth.method))},
                  {"p", o.p},
                  {"n", data.n()},
                  {"present_pairs", data.present_count()},
                  {"mixture_weight", data.mixture_weight()},
                  {"grid_integral", estimate.grid_integral()},
                  {"nodes", data.labels()},
                  {"config", echo(o)}});
  return kOk;
}

int cmd_band(const Options& o) {
  require_out(o);
  const auto config = rbc_config(o);
  const auto data = io::load_edge_list(single_input(o), o.trade);
  const auto result = rbc_band(data, config, o.seed);
  write_band_csv(o.out, result.band);
  auto meta = band_metadata(result);
  meta["command"] = "band";
  meta["n"] = data.n();
  meta["nodes"] = data.labels();
  meta["config"] = echo(o);
  write_json(sidecar_path(o.out), meta);
  return kOk;
}

int cmd_counterfactual(const Options& o) {
  require_out(o);
  if (o.covariates.empty()) throw UsageError("--covariates is required");
  const auto config = rbc_config(o);
  const auto data = io::load_edge_list(single_input(o), o.trade);
  const auto covariates = io::load_covariates(o.covariates, data);
  const auto observed = rbc_band(data, config, o.seed);
  const auto counterfactual = cf_band(data, covariates, config, o.seed);

  const fs::path out(o.out);
  write_band_csv(with_suffix(out, "_observed.csv"), observed.band);
  write_band_csv(with_suffix(out, "_counterfactual.csv"), counterfactual.band);
  json psi;
  for (std::size_t x = 0; x < covariates.level_count(); ++x) {
    psi[covariates.levels[x]] = {{"p0", counterfactual.p0[x]},
                                 {"p1", counterfactual.p1[x]},
                                 {"psi", counterfactual.psi.ratio[x]}};
  }
  write_json(sidecar_path(out), json{{"command", "counterfactual"},
                                     {"observed", band_metadata(observed)},
                                     {"counterfactual", band_metadata(counterfactual)},
                                     {"levels", psi},
                                     {"n", data.n()},
                                     {"config", echo(o)}});
  return kOk;
}

int cmd_test2(const Options& o) {
  if (o.inputs.size() != 2) throw UsageError("test2 needs two --input files");
  const auto config = rbc_config(o);
  const auto norm = as_usage([&] { return parse_tau_norm(o.norm); });
  const auto data0 = io::load_edge_list(o.inputs[0], o.trade);
  const auto data1 = io::load_edge_list(o.inputs[1], o.trade);
  const auto result = two_sample_test(data0, data1, norm, config, o.seed);
  write_json(o.out, json{{"command", "test2"},
                         {"tau", result.tau},
                         {"p_index", std::string(to_string(result.norm))},
                         {"critical_value", result.critical_value},
                         {"reject", result.reject},
                         {"alpha", result.alpha},
                         {"bandwidth0", result.bandwidth0},
                         {"bandwidth1", result.bandwidth1},
                         {"bandwidth_note", "rule-of-thumb bandwidth selected per sample"},
                         {"config", echo(o)}});
  return kOk;
}

int cmd_summary(const Options& o) {
  const auto data = io::load_edge_list(single_input(o), o.trade);
  const auto s = summary(data);
  write_json(o.out, json{{"nodes", s.nodes},
                         {"edges", s.edges},
                         {"edge_density", s.edge_density},
                         {"average_degree", s.average_degree},
                         {"clustering_coefficient", s.clustering_coefficient}});
  return kOk;
}

std::vector<sim::PiParams> parse_pis(const Options& o) {
  return as_usage([&] {
    std::vector<sim::PiParams> pis;
    for (const auto& text : o.pis) pis.push_back(sim::PiParams::parse(text));
    return pis;
  });
}

int cmd_simulate(const Options& o, const CLI::App& app) {
  require_out(o);
  auto config = o.full_scale ? sim::McConfig::full_scale() : sim::McConfig{};
  auto given = [&](const char* name) { return app.get_option(name)->count() > 0; };
  if (!o.pis.empty()) config.pis = parse_pis(o);
  if (given("--n")) config.n = o.n;
  if (given("--reps")) config.reps = o.reps;
  if (given("--grid")) config.grid_size = o.grid;
  if (given("--B")) config.draws = o.draws;
  config.p = o.p;
  config.p_prime = o.p_prime;
  config.alpha = o.alpha;
  config.seed = o.seed;
  as_usage([&] {
    config.family = parse_kernel_family(o.kernel);
    config.domain = parse_domain(o.domain);
    config.validate();
    return 0;
  });
  const auto report = sim::mc_study(config);
  io::write_atomically(o.out, [&](std::ostream& s) { sim::write_report_csv(s, report); });
  return kOk;
}

int cmd_generate(const Options& o) {
  require_out(o);
  const auto pis = parse_pis(o);
  if (pis.size() != 1) throw UsageError("generate needs exactly one --pi");
  const auto network = sim::generate(pis.front(), o.n, o.seed);
  io::write_atomically(o.out, [&](std::ostream& s) { io::write_edge_list(s, network.dataset); });
  return kOk;
}

// Reads `key = value` lines; `#` starts a comment. A value may list
// several entries separated by ';' for repeatable options.
std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path + "'");
  std::map<std::string, std::string> entries;
  std::string line;
  std::size_t number = 0;
  auto trim = [](std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return std::string();
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
  };
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InputError("config line " + std::to_string(number) + ": expected key = value");
    }
    auto key = trim(line.substr(0, eq));
    for (auto& c : key) {
      if (c == '_') c = '-';
    }
    if (key.empty()) throw InputError("config line " + std::to_string(number) + ": empty key");
    entries[key] = trim(line.substr(eq + 1));
  }
  return entries;
}

bool mentions(const std::vector<std::string>& args, const std::string& flag) {
  for (const auto& a : args) {
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  }
  return false;
}

// Splices config entries in front of the command-line flags; a key given
// on the command line is left to the command line.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t k = 0; k < args.size(); ++k) {
    if (args[k] == "--config" && k + 1 < args.size()) {
      path = args[k + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(k),
                 args.begin() + static_cast<std::ptrdiff_t>(k + 2));
      break;
    }
    if (args[k].rfind("--config=", 0) == 0) {
      path = args[k].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(k));
      break;
    }
  }
  if (path.empty()) return args;
  std::size_t command = 1;
  while (command < args.size() && args[command].rfind("-", 0) == 0) ++command;
  if (command >= args.size()) return args;

  std::vector<std::string> spliced;
  for (const auto& [key, value] : read_config(path)) {
    const std::string flag = "--" + key;
    if (mentions(args, flag)) continue;
    std::stringstream entries(value);
    std::string entry;
    bool any = false;
    while (std::getline(entries, entry, ';')) {
      const auto first = entry.find_first_not_of(" \t");
      if (first == std::string::npos) continue;
      entry = entry.substr(first, entry.find_last_not_of(" \t") - first + 1);
      spliced.push_back(flag + "=" + entry);
      any = true;
    }
    if (!any) spliced.push_back(flag + "=");
  }
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(command + 1), spliced.begin(),
              spliced.end());
  return args;
}

void add_data_options(CLI::App* cmd, Options& o, bool repeat_input = false) {
  auto* input = cmd->add_option("--input", o.inputs, "Edge list CSV")->required();
  if (!repeat_input) input->expected(1);
  cmd->add_flag("--trade", o.trade, "Edge list holds flow_ij,flow_ji columns");
}

void add_grid_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--domain", o.domain, "Inference domain a,b");
  cmd->add_option("--grid", o.grid, "Number of evaluation points");
  cmd->add_option("--kernel", o.kernel, "epanechnikov | triangular | uniform");
}

void add_band_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--p", o.p, "Bandwidth-selection kernel order");
  cmd->add_option("--p-prime", o.p_prime, "Inference kernel order");
  cmd->add_option("--alpha", o.alpha, "Significance level");
  cmd->add_option("--B", o.draws, "Gaussian resamples");
  cmd->add_option("--seed", o.seed, "Random seed");
  cmd->add_flag("--ridge", o.ridge, "Add a tiny ridge before the PSD projection");
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Dyadic kernel density estimation and uniform inference"};
  app.require_subcommand(1);
  app.add_option("--threads", o.threads, "Worker threads (0 = all cores)");
  app.add_option("--config", "key = value configuration file");

  auto* estimate = app.add_subcommand("estimate", "Density estimate on a grid");
  add_data_options(estimate, o);
  add_grid_options(estimate, o);
  estimate->add_option("--p", o.p, "Kernel order");
  estimate->add_option("--bandwidth", o.bandwidth, "Fixed bandwidth (default: rule of thumb)");
  estimate->add_option("--out", o.out, "Output CSV");

  auto* band = app.add_subcommand("band", "Robust bias-corrected uniform confidence band");
  add_data_options(band, o);
  add_grid_options(band, o);
  add_band_options(band, o);
  band->add_option("--out", o.out, "Output CSV");

  auto* cf = app.add_subcommand("counterfactual", "Observed and counterfactual bands");
  add_data_options(cf, o);
  add_grid_options(cf, o);
  add_band_options(cf, o);
  cf->add_option("--covariates", o.covariates, "Covariate CSV node,x0,x1");
  cf->add_option("--out", o.out, "Output CSV stem");

  auto* test2 = app.add_subcommand("test2", "Two-sample density equality test");
  add_data_options(test2, o, true);
  add_grid_options(test2, o);
  add_band_options(test2, o);
  test2->add_option("--norm", o.norm, "2 | inf");
  test2->add_option("--out", o.out, "Output JSON (default: stdout)");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo coverage study");
  add_grid_options(simulate, o);
  add_band_options(simulate, o);
  simulate->add_option("--pi", o.pis, "pi1,pi2,pi3 (repeatable)");
  simulate->add_option("--n", o.n, "Nodes per network");
  simulate->add_option("--reps", o.reps, "Replications");
  simulate->add_flag("--full-scale", o.full_scale, "2000 reps, n = 3000, d = 50, B = 10000");
  simulate->add_option("--out", o.out, "Report CSV");

  auto* summarize = app.add_subcommand("summary", "Network summary statistics");
  add_data_options(summarize, o);
  summarize->add_option("--out", o.out, "Output JSON (default: stdout)");

  auto* generate = app.add_subcommand("generate", "Draw a network from the latent-type model");
  generate->add_option("--pi", o.pis, "pi1,pi2,pi3")->required();
  generate->add_option("--n", o.n, "Nodes");
  generate->add_option("--seed", o.seed, "Random seed");
  generate->add_option("--out", o.out, "Edge list CSV");

  try {
    std::vector<std::string> args(argv, argv + argc);
    args = expand_config(std::move(args));
    std::vector<char*> pointers;
    for (auto& a : args) pointers.push_back(a.data());
    app.parse(static_cast<int>(pointers.size()), pointers.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  } catch (const InputError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (o.threads != 0) set_thread_count(o.threads);
    if (estimate->parsed()) return cmd_estimate(o);
    if (band->parsed()) return cmd_band(o);
    if (cf->parsed()) return cmd_counterfactual(o);
    if (test2->parsed()) return cmd_test2(o);
    if (simulate->parsed()) return cmd_simulate(o, *simulate);
    if (summarize->parsed()) return cmd_summary(o);
    if (generate->parsed()) return cmd_generate(o);
    return kUsage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInput;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInput;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  }
}
