#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "sf/pipeline/config.hpp"
#include "sf/pipeline/io.hpp"

using namespace sf;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("sf_unit_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

// Runs sflow with stdout and stderr captured to files; returns the exit code.
int sflow(const std::string& args, const TempDir& t, std::string* err = nullptr) {
  const std::string cmd =
      std::string(SFLOW_BIN) + " " + args + " >" + (t / "stdout.txt") + " 2>" + (t / "stderr.txt");
  const int rc = std::system(cmd.c_str());
  if (err) *err = read_text(t / "stderr.txt");
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST_CASE("config parsing") {
  const auto c = parse_config(R"(# tuning setup
domain = [32, 16, 8]
workers = 2
model_cost = true
tuning_module = "copy"
tiles = [0, 4]
gain = 0.05
)");
  CHECK(c.domain.ni == 32);
  CHECK(c.domain.nj == 16);
  CHECK(c.domain.nk == 8);
  CHECK(c.workers == 2);
  CHECK(c.model_cost);
  CHECK(c.tuning_module == "copy");
  CHECK(c.tiles == std::vector<int>{0, 4});
  CHECK(c.gain == 0.05);
  // defaults for the rest
  CHECK(c.m == 2);
  CHECK(c.reps == 10);
}

TEST_CASE("config errors carry the line") {
  for (const char* text : {"workers = 1\nbogus = 3\n", "workers = 1\nreps = abc\n", "workers = 1\ndomain 4\n"}) {
    CAPTURE(text);
    try {
      parse_config(text);
      FAIL("no error");
    } catch (const Error& e) {
      CHECK(e.category() == "config");
      CHECK(e.loc().line == 2);
    }
  }
}

TEST_CASE("config overrides and canonical text") {
  PipelineConfig c;
  apply_override(c, "m=3");
  apply_override(c, "domain=[8, 8, 4]");
  apply_override(c, "model_cost=true");
  CHECK(c.m == 3);
  CHECK(c.domain.ni == 8);
  CHECK(c.model_cost);
  CHECK_THROWS_AS(apply_override(c, "m"), Error);
  CHECK_THROWS_AS(apply_override(c, "nope=1"), Error);
  const auto back = parse_config(config_text(c));
  CHECK(config_to_json(back) == config_to_json(c));
  CHECK(config_text(back) == config_text(c));
}

TEST_CASE("field files round trip") {
  TempDir t;
  const auto g = compile_corpus("transport", {8, 6, 4});
  FieldSet f = allocate_fields(g);
  fill_inputs(f, g, 3);
  const Container& q = g.container("q");
  write_field(t / "q", f.at("q"), q, g.domain);
  CHECK(fs::exists(t / "q.bin"));
  CHECK(fs::exists(t / "q.json"));
  FieldSet h = allocate_fields(g);
  read_field(t / "q", h.at("q"), q, g.domain);
  bool same = true;
  for (int k = 0; k < 4; ++k)
    for (int j = 0; j < 6; ++j)
      for (int i = 0; i < 8; ++i) same = same && h.at("q").get(i, j, k) == f.at("q").get(i, j, k);
  CHECK(same);
  // a field of another shape is refused
  const auto g2 = compile_corpus("transport", {4, 6, 4});
  FieldSet h2 = allocate_fields(g2);
  CHECK_THROWS_AS(read_field(t / "q", h2.at("q"), g2.container("q"), g2.domain), Error);
}

TEST_CASE("output directory manifest") {
  TempDir t;
  {
    OutputDir out(t / "run", "unit");
    out.write("a.txt", std::string("hello\n"));
    out.write("b.json", nlohmann::json{{"z", 1}, {"a", 2}});
    out.finish();
  }
  const auto m = read_json(t / "run/manifest.json");
  CHECK(m.at("command") == "unit");
  REQUIRE(m.at("artifacts").size() == 2);
  CHECK(m.at("artifacts")[0].at("path") == "a.txt");
  CHECK(m.at("artifacts")[0].at("bytes") == 6);
  CHECK(m.at("artifacts")[0].at("fnv1a") == file_digest(t / "run/a.txt"));
  // FNV-1a 64 of "hello\n", computed separately
  CHECK(file_digest(t / "run/a.txt") == "a9bc80cca21f28b3");
  // keys sorted
  CHECK(read_text(t / "run/b.json").find("\"a\"") < read_text(t / "run/b.json").find("\"z\""));
}

TEST_CASE("cli: compile, bench, report") {
  TempDir t;
  REQUIRE(sflow("compile copy --domain 8,8,4 -o " + (t / "c"), t) == 0);
  const auto g = graph_from_json(read_json(t / "c/graph.json"));
  CHECK(g.node_count() == 1);
  CHECK(fs::exists(t / "c/manifest.json"));

  REQUIRE(sflow("bench copy --domain 8,8,4 --set reps=10 -o " + (t / "b"), t) == 0);
  const std::string raw = read_text(t / "b/timings_raw.csv");
  std::istringstream in(raw);
  std::string line;
  int rows = 0;
  std::getline(in, line);
  while (std::getline(in, line)) rows += line.empty() ? 0 : 1;
  CHECK(rows == 10);
  CHECK(first_line(read_text(t / "b/timings.csv")) == "kernel,invocations,median_s,min_s");

  REQUIRE(sflow("report copy --domain 8,8,4 --set bandwidth=1e10 --timings " + (t / "b/timings_raw.csv") + " -o " +
                    (t / "r"),
                t) == 0);
  CHECK(first_line(read_text(t / "r/report.csv")) == "kernel,invocations,measured_s,bound_s,utilization,flags");
}

TEST_CASE("cli: user errors exit 1 with a diagnostic") {
  TempDir t;
  {
    std::ofstream(t / "bad.stn") << "field a: float64[I, J, K]\nstencil s:\n    with computation(PARALLEL), interval(...):\n"
                                    "        a = (a +\ndriver:\n    s()\n";
  }
  std::string err;
  CHECK(sflow("compile " + (t / "bad.stn") + " -o " + (t / "x"), t, &err) == 1);
  CHECK(err.find(t / "bad.stn") != std::string::npos);
  CHECK(err.find("syntax error") != std::string::npos);

  {
    std::ofstream(t / "invalid.stn") << "field a: float64[I, J, K]\nstencil s:\n"
                                        "    with computation(PARALLEL), interval(...):\n        a = a[1, 0, 0]\n"
                                        "driver:\n    s()\n";
  }
  CHECK(sflow("compile " + (t / "invalid.stn") + " -o " + (t / "x"), t, &err) == 1);
  CHECK(err.find("self-referencing offset") != std::string::npos);

  CHECK(sflow("compile nosuchprogram -o " + (t / "x"), t) == 1);
  CHECK(sflow("frobnicate", t) == 1);
  CHECK(sflow("bench copy --set reps=-1 -o " + (t / "x"), t) == 1);
}
