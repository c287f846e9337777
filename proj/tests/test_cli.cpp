// End-to-end checks of the command-line tool: exit codes, output formats,
// and byte-level reproducibility.  The binary path comes from the build
// system via LIPTREE_CLI_PATH.
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

const fs::path& scratch_dir() {
  static const fs::path dir = [] {
    fs::path p = fs::temp_directory_path() /
                 ("liptree_cli_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

RunResult run_cli(const std::string& args) {
  const fs::path out = scratch_dir() / "stdout.txt";
  const fs::path err = scratch_dir() / "stderr.txt";
  std::string cmd = std::string(LIPTREE_CLI_PATH) + " " + args + " > " +
                    out.string() + " 2> " + err.string();
  int rc = std::system(cmd.c_str());
  RunResult r;
  if (rc != -1 && WIFEXITED(rc)) r.code = WEXITSTATUS(rc);
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line))
    if (!line.empty()) lines.push_back(line);
  return lines;
}

fs::path write_scratch(const std::string& name, const std::string& content) {
  fs::path p = scratch_dir() / name;
  std::ofstream os(p);
  os << content;
  return p;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("--help exits 0 and names the subcommands") {
  auto r = run_cli("--help");
  CHECK(r.code == 0);
  CHECK(r.out.find("iterate") != std::string::npos);
  CHECK(r.out.find("certify") != std::string::npos);
  CHECK(r.out.find("figure1") != std::string::npos);
}

TEST_CASE("iterate emits the documented CSV layout") {
  auto r = run_cli("iterate --d 2 --steps 50 --every 10");
  REQUIRE(r.code == 0);
  auto rows = lines_of(r.out);
  REQUIRE(!rows.empty());
  CHECK(rows[0] == "step,x1,x2,x3,x4,x5,x6,x7,x8,norm_delta");
  // Recorded steps: 1, 10, 20, 30, 40, 50.
  REQUIRE(rows.size() == 7);
  CHECK(rows[1].rfind("1,", 0) == 0);
  CHECK(rows.back().rfind("50,", 0) == 0);
  // Every data row has 10 comma-separated fields.
  for (std::size_t i = 1; i < rows.size(); ++i)
    CHECK(std::count(rows[i].begin(), rows[i].end(), ',') == 9);
}

TEST_CASE("iterate --format json returns a parsable trace") {
  auto r = run_cli("iterate --d 3 --steps 20 --format json");
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("steps").get<std::size_t>() == 20);
  CHECK(!j.at("rows").empty());
  CHECK(!j.at("final_state").at("entries").empty());
  CHECK(j.at("d").get<int>() == 3);
}

TEST_CASE("iterate accepts a good-weights start and rejects a bad one") {
  auto good = write_scratch("weights_good.json",
                            R"({"flat_radius": 1, "decay_rate": 0.5, "tail": [0.5, 0.25]})");
  auto r = run_cli("iterate --d 2 --steps 5 --start " + good.string());
  CHECK(r.code == 0);

  auto bad = write_scratch("weights_bad.json",
                           R"({"flat_radius": 1, "decay_rate": 1.5, "tail": [0.5]})");
  auto rb = run_cli("iterate --d 2 --steps 5 --start " + bad.string());
  CHECK(rb.code == 3);
  CHECK(rb.err.find("decay rate") != std::string::npos);
}

TEST_CASE("rational iterate matches the exact conjugacy value") {
  auto r = run_cli("iterate --d 2 --steps 2 --mode rational --format json");
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  // psi^2(0) = ((2/3)^2, (1/2)^2) exactly.
  auto entries = j.at("final_state").at("entries");
  REQUIRE(entries.size() >= 2);
  CHECK(entries[0].get<std::string>() == "4/9");
  CHECK(entries[1].get<std::string>() == "1/4");
}

TEST_CASE("sample output is seed-reproducible byte for byte") {
  const std::string args = "sample --n 2 --d 2 --boundary zero --count 3";
  auto a = run_cli(args + " --seed 99");
  auto b = run_cli(args + " --seed 99");
  auto c = run_cli(args + " --seed 100");
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out != c.out);
  // Three JSON lines, each a full sample of the 7-vertex tree.
  auto rows = lines_of(a.out);
  REQUIRE(rows.size() == 3);
  for (const auto& row : rows) {
    auto j = nlohmann::json::parse(row);
    CHECK(j.at("full").get<bool>());
    CHECK(j.at("heights").size() == 7);
  }
}

TEST_CASE("sample accepts a boundary weights file") {
  auto b = write_scratch("boundary01.json", R"({"lo": 0, "values": [1, 1]})");
  auto r = run_cli("sample --n 2 --d 2 --boundary " + b.string() + " --count 2");
  REQUIRE(r.code == 0);
  CHECK(lines_of(r.out).size() == 2);
}

TEST_CASE("marginal in rational mode is exact") {
  auto r = run_cli("marginal --n 2 --d 2 --boundary zero --mode rational");
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("marginal").at("lo").get<long>() == -2);
  std::vector<std::string> want{"1/19", "4/19", "9/19", "4/19", "1/19"};
  CHECK(j.at("marginal").at("values").get<std::vector<std::string>>() == want);
}

TEST_CASE("certify exits 0 on a passing certificate and 2 on a failing one") {
  auto ok = run_cli("certify --d 3 --what contraction --mode rational");
  REQUIRE(ok.code == 0);
  auto j = nlohmann::json::parse(ok.out);
  CHECK(j.at("pass").get<bool>());

  // The --abc path must run the same norm computation as the builtin path:
  // feeding the certified d = 3 triple back in reproduces its exact bound.
  auto same = run_cli("certify --d 3 --what contraction --abc 2/5,3/5,1/5");
  REQUIRE(same.code == 0);
  auto js = nlohmann::json::parse(same.out);
  bool saw_opnorm = false;
  for (const auto& chk : js.at("reports").at(0).at("checks")) {
    if (chk.at("name").get<std::string>().rfind("operator norm", 0) != 0) continue;
    saw_opnorm = true;
    CHECK(chk.at("pass").get<bool>());
    CHECK(chk.at("detail").get<std::string>().find("0.813048") != std::string::npos);
  }
  CHECK(saw_opnorm);

  // c = 499/500 >= 1/2 violates the side conditions.
  auto bad = run_cli("certify --d 2 --what contraction --abc 1/1000,999/1000,499/500");
  CHECK(bad.code == 2);
  auto jb = nlohmann::json::parse(bad.out);
  CHECK_FALSE(jb.at("pass").get<bool>());
}

TEST_CASE("usage errors exit 3") {
  CHECK(run_cli("iterate --d 2").code == 3);              // missing --steps
  CHECK(run_cli("bogus").code == 3);                      // unknown subcommand
  CHECK(run_cli("certify --d 9 --what contraction").code == 3);
  CHECK(run_cli("iterate --d 2 --steps 5 --format yaml").code == 3);
}

TEST_CASE("envelope pipeline JSON carries the domination certificate") {
  auto r = run_cli("envelope --d 4");
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("final_box").contains("a"));
  bool all = true;
  for (const auto& line : j.at("domination").at("checks"))
    all = all && line.at("pass").get<bool>();
  CHECK(all);
}

TEST_CASE("fkg counterexample subcommand passes") {
  auto r = run_cli("fkg --mode counterexample");
  CHECK(r.code == 0);
}

TEST_CASE("fkg heights mode reads kappa pairs from a file") {
  auto k = write_scratch("kappa_pairs.json",
                         R"({"pairs": [[{"0": [0], "3": [0]}, {"0": [0, 1], "3": [0, 1]}]]})");
  auto r = run_cli("fkg --graph path:4 --mode heights --kappa " + k.string());
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  for (const auto& line : j.at("checks")) CHECK(line.at("pass").get<bool>());
}

TEST_CASE("gibbs runs on a builder graph and reports clusters") {
  auto r = run_cli("gibbs --graph tree:2,2 --sweeps 50 --probes 0");
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("final_state").size() == 7);
  CHECK(j.at("clusters").contains("component_size_histogram"));
}

TEST_CASE("tables emits the certified-triple table") {
  auto r = run_cli("tables --which 2");
  REQUIRE(r.code == 0);
  auto rows = lines_of(r.out);
  REQUIRE(rows.size() >= 4);
  CHECK(rows[0] == "# table 2");
  CHECK(rows[1] == "quantity,d=2,d=3,d=4,d=5,d=6,d=7");
  CHECK(rows[2].rfind("a_hat,1/2,", 0) == 0);
}

TEST_CASE("figure1 emits one row per grid point per d") {
  auto r = run_cli("figure1 --d 2 --grid 11");
  REQUIRE(r.code == 0);
  auto rows = lines_of(r.out);
  REQUIRE(rows.size() == 12);
  CHECK(rows[0] == "d,x,f,ff");
  CHECK(rows[1].rfind("2,", 0) == 0);
}

TEST_CASE("--out writes the same bytes as stdout") {
  fs::path out = scratch_dir() / "trace.csv";
  auto direct = run_cli("iterate --d 2 --steps 10 --every 2");
  auto filed = run_cli("iterate --d 2 --steps 10 --every 2 --out " + out.string());
  REQUIRE(direct.code == 0);
  REQUIRE(filed.code == 0);
  CHECK(filed.out.empty());
  CHECK(slurp(out) == direct.out);
}

}  // TEST_SUITE
