#include <doctest.h>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(ENTLINK_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("entlink-cli-" + std::to_string(std::rand()) + "-" +
                                        std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("cli exit codes") {
  TempDir tmp;
  const std::string out = " --out " + (tmp.path / "o").string();
  CHECK(run("simulate --preset afc-g2 --trials 20000" + out) == 0);
  CHECK(run("simulate --preset no-such-preset" + out) == 2);
  CHECK(run("simulate --preset afc-g2 --trials 0" + out) == 2);
  CHECK(run("simulate" + out) == 2);
  CHECK(run("frobnicate") == 2);

  std::ofstream(tmp.path / "bad.json") << R"({"experiment": "afc-g2", "source": {"tau_pair": -1}})";
  CHECK(run("simulate --config " + (tmp.path / "bad.json").string() + out) == 2);
  std::ofstream(tmp.path / "broken.json") << "{";
  CHECK(run("simulate --config " + (tmp.path / "broken.json").string() + out) == 2);

  std::ofstream(tmp.path / "short.log") << slurp(tmp.path / "o" / "events.log").substr(0, 2000);
  CHECK(run("analyze " + (tmp.path / "short.log").string() + out) == 2);

  std::ofstream(tmp.path / "blocker") << "x";
  CHECK(run("simulate --preset afc-g2 --trials 20000 --out " + (tmp.path / "blocker" / "sub").string()) == 3);
}

TEST_CASE("cli outputs are reproducible and analyze matches simulate") {
  TempDir tmp;
  const fs::path a = tmp.path / "a", b = tmp.path / "b", c = tmp.path / "c";
  REQUIRE(run("simulate --preset sw-g2 --trials 300000 --threads 1 --out " + a.string()) == 0);
  REQUIRE(run("simulate --preset sw-g2 --trials 300000 --threads 4 --out " + b.string()) == 0);
  CHECK(slurp(a / "estimates.csv") == slurp(b / "estimates.csv"));
  CHECK(slurp(a / "events.log") == slurp(b / "events.log"));
  CHECK_FALSE(slurp(a / "estimates.csv").empty());

  REQUIRE(run("analyze " + (a / "events.log").string() + " --out " + c.string()) == 0);
  CHECK(slurp(a / "estimates.csv") == slurp(c / "estimates.csv"));
  CHECK(fs::exists(a / "manifest.json"));
  CHECK(slurp(a / "estimates.csv").starts_with("# entlink manifest digest="));
}

TEST_CASE("cli wider window lowers g2") {
  TempDir tmp;
  const fs::path o = tmp.path / "w";
  REQUIRE(run("simulate --preset sw-g2 --trials 2000000 --threads 4 --window 280ns,560ns --out " + o.string()) == 0);
  std::istringstream csv(slurp(o / "estimates.csv"));
  std::string line, header;
  std::getline(csv, line);
  std::getline(csv, header);
  // First column is the window, second g2.
  std::vector<double> g2;
  while (std::getline(csv, line)) {
    std::istringstream row(line);
    std::string window, value;
    std::getline(row, window, ',');
    std::getline(row, value, ',');
    g2.push_back(std::stod(value));
  }
  REQUIRE(g2.size() == 2);
  CHECK(g2[1] < g2[0]);
}

TEST_CASE("cli output directory defaults to ENTLINK_OUT") {
  TempDir tmp;
  const fs::path o = tmp.path / "env";
  const std::string cmd = "ENTLINK_OUT=" + o.string() + " " + ENTLINK_CLI_PATH +
                          " simulate --preset afc-g2 --trials 20000 >/dev/null 2>&1";
  REQUIRE(std::system(cmd.c_str()) == 0);
  CHECK(fs::exists(o / "estimates.csv"));
  CHECK(fs::exists(o / "events.log"));
}
