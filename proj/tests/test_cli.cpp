#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>

#include <json.hpp>

#include "dyadic/estimator.hpp"
#include "dyadic/io.hpp"
#include "dyadic/simulation.hpp"

namespace fs = std::filesystem;
using namespace dyadic;

namespace {

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() /
          ("dyadic-cli-" + std::to_string(std::random_device{}()));
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  Scratch(const Scratch&) = delete;
  Scratch& operator=(const Scratch&) = delete;
  std::string operator/(const std::string& name) const { return (dir / name).string(); }
};

struct Run {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Run run(const Scratch& s, const std::string& args) {
  const auto out = s / "stdout.txt";
  const auto err = s / "stderr.txt";
  const std::string command =
      std::string(DYADIC_CLI) + " " + args + " >" + out + " 2>" + err;
  const int status = std::system(command.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream(path) << text;
}

std::vector<std::vector<double>> read_csv(const std::string& path) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_CASE("usage errors exit with 1") {
  Scratch s;
  CHECK(run(s, "").code == 1);
  CHECK(run(s, "frobnicate").code == 1);
  CHECK(run(s, "estimate --input x.csv --bogus").code == 1);
  write_file(s / "e.csv", "i,j,w\na,b,0.1\nb,c,0.3\na,c,-0.2\n");
  CHECK(run(s, "band --input " + s / "e.csv" + " --out " + s / "b.csv" + " --p 4 --p-prime 4").code == 1);
  CHECK(run(s, "band --input " + s / "e.csv" + " --out " + s / "b.csv" + " --kernel gaussian").code == 1);
  CHECK(run(s, "band --input " + s / "e.csv" + " --out " + s / "b.csv" + " --alpha 1.5").code == 1);
  CHECK(run(s, "band --input " + s / "e.csv").code == 1);
  CHECK_FALSE(fs::exists(s / "b.csv"));
}

TEST_CASE("input errors exit with 2 and leave no output") {
  Scratch s;
  CHECK(run(s, "estimate --input " + s / "missing.csv" + " --out " + s / "o.csv").code == 2);
  write_file(s / "bad.csv", "i,j,w\na,b,0.1\nb,c\n");
  const auto r = run(s, "estimate --input " + s / "bad.csv" + " --out " + s / "o.csv");
  CHECK(r.code == 2);
  CHECK_FALSE(r.err.empty());
  CHECK_FALSE(fs::exists(s / "o.csv"));
  CHECK_FALSE(fs::exists(s / "o.csv.partial"));
}

TEST_CASE("generated networks round-trip through estimate bit for bit") {
  Scratch s;
  REQUIRE(run(s, "generate --pi 1/5,1/5,3/5 --n 40 --seed 9 --out " + s / "net.csv").code == 0);
  REQUIRE(run(s, "estimate --input " + s / "net.csv" + " --grid 21 --bandwidth 0.5 --p 4 --out " +
                     s / "est.csv").code == 0);
  const auto direct = sim::generate(sim::PiParams::parse("1/5,1/5,3/5"), 40, 9);
  const auto loaded = io::load_edge_list(s / "net.csv");
  REQUIRE(loaded.n() == 40);
  const KernelSpec spec{KernelFamily::epanechnikov, 4, 0.5, {}};
  const auto grid = EvaluationGrid::uniform({}, 21);
  const auto expected = fhat(loaded, spec, grid);
  const auto from_sim = fhat(direct.dataset, spec, grid);
  const auto rows = read_csv(s / "est.csv");
  REQUIRE(rows.size() == 21);
  for (std::size_t m = 0; m < 21; ++m) {
    CHECK(rows[m][0] == grid[m]);
    CHECK(rows[m][1] == expected.values[m]);
    CHECK(rows[m][1] == doctest::Approx(from_sim.values[m]).epsilon(1e-13));
  }
  const auto meta = nlohmann::json::parse(slurp(s / "est.json"));
  CHECK(meta["h"] == 0.5);
  CHECK(meta["bandwidth_method"] == "manual");
  CHECK(meta["present_pairs"] == 780);
}

TEST_CASE("band output and sidecar") {
  Scratch s;
  REQUIRE(run(s, "generate --pi 0.2,0.2,0.6 --n 50 --seed 2 --out " + s / "net.csv").code == 0);
  const std::string base = "band --input " + s / "net.csv" + " --grid 15 --B 500 --seed 4 --out ";
  REQUIRE(run(s, base + s / "a.csv").code == 0);
  REQUIRE(run(s, "--threads 1 " + base + s / "b.csv").code == 0);
  CHECK(slurp(s / "a.csv") == slurp(s / "b.csv"));
  const auto rows = read_csv(s / "a.csv");
  REQUIRE(rows.size() == 15);
  for (const auto& row : rows) {
    REQUIRE(row.size() == 5);
    CHECK(row[2] <= row[1]);
    CHECK(row[3] >= row[1]);
  }
  const auto meta = nlohmann::json::parse(slurp(s / "a.json"));
  CHECK(meta["q_hat"].get<double>() > 0.0);
  CHECK(meta["kernel_order"] == 4);
  CHECK(meta["config"]["B"] == 500);
}

TEST_CASE("numerical failures exit with 3") {
  Scratch s;
  // A small totally degenerate network drives raw variances negative at the
  // domain edges, so the covariance normalization breaks down.
  REQUIRE(run(s, "generate --pi 0.5,0,0.5 --n 30 --seed 2 --out " + s / "net.csv").code == 0);
  const auto r = run(s, "band --input " + s / "net.csv" + " --grid 15 --B 500 --out " + s / "a.csv");
  CHECK(r.code == 3);
  CHECK(r.err.find("normalization") != std::string::npos);
  CHECK_FALSE(fs::exists(s / "a.csv"));
}

TEST_CASE("config file values yield to explicit flags") {
  Scratch s;
  REQUIRE(run(s, "generate --pi 0.2,0.2,0.6 --n 30 --seed 5 --out " + s / "net.csv").code == 0);
  write_file(s / "run.cfg", "# study settings\nalpha = 0.2\ngrid = 11\nB = 300\n");
  REQUIRE(run(s, "--config " + s / "run.cfg" + " band --input " + s / "net.csv" + " --alpha 0.1 --out " +
                     s / "c.csv").code == 0);
  const auto meta = nlohmann::json::parse(slurp(s / "c.json"));
  CHECK(meta["config"]["alpha"] == 0.1);
  CHECK(meta["config"]["grid"] == 11);
  CHECK(meta["config"]["B"] == 300);
  write_file(s / "bad.cfg", "alpha = -3\n");
  CHECK(run(s, "--config " + s / "bad.cfg" + " band --input " + s / "net.csv" + " --out " + s / "d.csv").code == 1);
}

TEST_CASE("counterfactual command") {
  Scratch s;
  REQUIRE(run(s, "generate --pi 0.2,0.2,0.6 --n 50 --seed 6 --out " + s / "net.csv").code == 0);
  const auto loaded = io::load_edge_list(s / "net.csv");
  std::string good = "node,x0,x1\n", bad = "node,x0,x1\n";
  for (std::size_t i = 0; i < loaded.n(); ++i) {
    const auto& node = loaded.labels()[i];
    good += node + "," + (i % 3 ? "low" : "high") + "," + (i % 2 ? "low" : "high") + "\n";
    bad += node + "," + (i == 4 ? "island" : "low") + ",low\n";
  }
  write_file(s / "good.csv", good);
  write_file(s / "bad.csv", bad);
  const std::string base = "counterfactual --input " + s / "net.csv" + " --grid 9 --B 300 --covariates ";
  REQUIRE(run(s, base + s / "good.csv" + " --out " + s / "cf.csv").code == 0);
  CHECK(read_csv(s / "cf_observed.csv").size() == 9);
  CHECK(read_csv(s / "cf_counterfactual.csv").size() == 9);
  const auto meta = nlohmann::json::parse(slurp(s / "cf.json"));
  CHECK(meta["levels"].contains("low"));

  const auto r = run(s, base + s / "bad.csv" + " --out " + s / "bad_out.csv");
  CHECK(r.code == 2);
  CHECK(r.err.find("island") != std::string::npos);
  CHECK_FALSE(fs::exists(s / "bad_out_observed.csv"));
}

TEST_CASE("two-sample and summary commands") {
  Scratch s;
  REQUIRE(run(s, "generate --pi 0.2,0.2,0.6 --n 50 --seed 7 --out " + s / "a.csv").code == 0);
  const auto same = run(s, "test2 --input " + s / "a.csv" + " --input " + s / "a.csv" + " --grid 10 --B 300 --norm 2");
  REQUIRE(same.code == 0);
  const auto result = nlohmann::json::parse(same.out);
  CHECK(result["tau"] == 0.0);
  CHECK(result["reject"] == false);
  CHECK(run(s, "test2 --input " + s / "a.csv").code == 1);
  CHECK(run(s, "test2 --input " + s / "a.csv" + " --input " + s / "a.csv" + " --norm 3").code == 1);

  const auto summary = run(s, "summary --input " + s / "a.csv");
  REQUIRE(summary.code == 0);
  CHECK(nlohmann::json::parse(summary.out)["nodes"] == 50);
}

TEST_CASE("simulate writes a report") {
  Scratch s;
  REQUIRE(run(s, "simulate --pi 0.5,0,0.5 --n 30 --reps 3 --grid 7 --B 200 --out " + s / "mc.csv").code == 0);
  const auto text = slurp(s / "mc.csv");
  CHECK(text.rfind("pi,degeneracy,order,", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
  CHECK(run(s, "simulate --pi 0.5,0.6,0 --reps 3 --out " + s / "x.csv").code == 1);
}
