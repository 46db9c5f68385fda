#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "ceef/catalog.hpp"
#include "ceef/emit.hpp"
#include "ceef/formula.hpp"

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int code = -1;
  std::string out;
};

const std::string& scratch_dir() {
  static const std::string dir = [] {
    fs::path p = fs::temp_directory_path() /
                 ("ceef-cli-test-" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p.string();
  }();
  return dir;
}

// Runs the installed binary with a private catalog cache; stderr is dropped.
RunResult run_cli(const std::string& args) {
  const char* bin = std::getenv("CEEF_BIN");
  if (!bin || !*bin) SKIP("CEEF_BIN is not set");
  std::string cmd = std::string("\"") + bin + "\" --cache \"" + scratch_dir() +
                    "/cache\" " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult r;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string write_temp(const std::string& name, const std::string& content) {
  std::string path = scratch_dir() + "/" + name;
  std::ofstream out(path);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("the binary emits the reference closed form") {
  RunResult r = run_cli("generate --m 4 --format latex");
  CHECK(r.code == 0);
  CHECK(r.out ==
        "+1 \\mathrm{tr}(A^{4})\n"
        "-2 {\\bf 1}_n' \\cdot (A \\circ A)^{2} \\cdot {\\bf 1}_n\n"
        "+1 {\\bf 1}_n' \\cdot (A \\circ A \\circ A \\circ A) \\cdot {\\bf 1}_n\n");
}

TEST_CASE("json output is stable and loads back") {
  RunResult first = run_cli("generate --m 4 --format json");
  RunResult second = run_cli("generate --m 4 --format json");
  CHECK(first.code == 0);
  CHECK(first.out == second.out);

  ceef::Formula parsed = ceef::parse_formula(first.out);
  ceef::Formula local = ceef::build_formula(ceef::build_catalog(4));
  REQUIRE(parsed.terms.size() == local.terms.size());
  for (std::size_t i = 0; i < parsed.terms.size(); ++i)
    CHECK(parsed.terms[i].coef == local.terms[i].coef);
}

TEST_CASE("orders below three are rejected") {
  RunResult r = run_cli("generate --m 2 --format latex");
  CHECK(r.code == 2);
  CHECK(r.out.empty());
}

TEST_CASE("the order limit is explicit") {
  CHECK(run_cli("generate --m 13 --format latex").code == 2);
  RunResult raised = run_cli("--max-m 9 generate --m 9 --format json");
  CHECK(raised.code == 0);
  CHECK_FALSE(raised.out.empty());
}

TEST_CASE("evaluation reads files and stdin") {
  std::string k3 = write_temp("k3.txt", "3 integer\n0 1 1\n1 0 1\n1 1 0\n");
  RunResult file_run = run_cli("eval --m 3 --matrix \"" + k3 + "\"");
  CHECK(file_run.code == 0);
  CHECK(file_run.out == "6\n");

  RunResult stdin_run = run_cli("eval --m 3 --matrix - < \"" + k3 + "\"");
  CHECK(stdin_run.code == 0);
  CHECK(stdin_run.out == "6\n");

  std::string k4 = write_temp("k4.txt", "4\n0 1 1 1\n1 0 1 1\n1 1 0 1\n1 1 1 0\n");
  RunResult real_run = run_cli("eval --m 4 --matrix \"" + k4 + "\"");
  CHECK(real_run.code == 0);
  CHECK(real_run.out == "24\n");
}

TEST_CASE("missing matrix files are runtime errors") {
  RunResult r = run_cli("eval --m 3 --matrix " + scratch_dir() + "/absent.txt");
  CHECK(r.code == 1);
}

TEST_CASE("the catalog listing carries the class data") {
  RunResult r = run_cli("catalog --m 4 --format text");
  CHECK(r.code == 0);
  CHECK(r.out ==
        "# order 4, 3 classes\n"
        "# each c [a,b] in a graph is an edge between vertices a and b with multiplicity c\n"
        "k=4 t=1 d=1 h=1 a=1 graph={1 [1,3]; 1 [1,4]; 1 [2,3]; 1 [2,4]}\n"
        "k=3 t=1 d=2 h=1 a=-2 graph={2 [1,3]; 2 [2,3]}\n"
        "k=2 t=1 d=1 h=1 a=1 graph={4 [1,2]}\n");
}

TEST_CASE("validation reports each order and a final verdict") {
  RunResult r = run_cli("validate --m 3..4 --n 6 --trials 2 --seed 7");
  CHECK(r.code == 0);
  CHECK(r.out.find("m=3 trials=2") != std::string::npos);
  CHECK(r.out.find("m=4 trials=2") != std::string::npos);
  CHECK(r.out.find("float=ok integer=ok divisible=ok") != std::string::npos);
  CHECK(r.out.find("all checks passed") != std::string::npos);
}

TEST_CASE("benchmarks print timings and the growth fit") {
  RunResult r = run_cli("bench --m 3 --sizes 12,16 --seed 1");
  CHECK(r.code == 0);
  CHECK(r.out.find("# order 3") != std::string::npos);
  CHECK(r.out.find("growth exponent:") != std::string::npos);
}

TEST_CASE("detection prints one score per order") {
  RunResult r = run_cli("detect --n 20 --orders 3,4 --reps 2 --seed 1");
  CHECK(r.code == 0);
  CHECK(r.out.rfind("# n=20 ", 0) == 0);
  CHECK(r.out.find("m=3 se=") != std::string::npos);
  CHECK(r.out.find("m=4 se=") != std::string::npos);

  std::string report = scratch_dir() + "/detect.json";
  RunResult with_file =
      run_cli("detect --n 20 --orders 3 --reps 2 --seed 1 --out \"" + report + "\"");
  CHECK(with_file.code == 0);
  std::ifstream in(report);
  REQUIRE(in.good());
  nlohmann::json j = nlohmann::json::parse(in);
  CHECK(j["n"] == 20);
  REQUIRE(j["results"].size() == 1);
  CHECK(j["results"][0]["m"] == 3);
}

TEST_CASE("output lands in the requested file") {
  std::string path = scratch_dir() + "/m5.json";
  RunResult r = run_cli("generate --m 5 --format json --out \"" + path + "\"");
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  std::ifstream in(path);
  REQUIRE(in.good());
  nlohmann::json j = nlohmann::json::parse(in);
  CHECK(j["m"] == 5);
}

TEST_CASE("bad invocations exit with a parse failure") {
  CHECK(run_cli("bogus").code == 2);
  CHECK(run_cli("").code == 2);
  CHECK(run_cli("generate").code == 2);
}
