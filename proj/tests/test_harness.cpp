#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "quatro/harness/presets.hpp"

using namespace quatro;
using namespace quatro::harness;

namespace {

namespace fs = std::filesystem;

struct ScopedSeed {
  explicit ScopedSeed(const char* v) {
    if (v) {
      setenv("QUATRO_SEED", v, 1);
    } else {
      unsetenv("QUATRO_SEED");
    }
  }
  ~ScopedSeed() { unsetenv("QUATRO_SEED"); }
};

fs::path scratch(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("quatro_harness_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

ExperimentConfig config(const std::string& experiment, json params, std::uint64_t seed = 0) {
  return ExperimentConfig::from_json({{"experiment", experiment}, {"params", std::move(params)}, {"seed", seed}});
}

std::map<std::string, std::string> csvs(const ResultBundle& b) {
  std::map<std::string, std::string> out;
  for (const auto& [name, t] : b.tables) out[name] = t.csv();
  return out;
}

fs::path write_workload(const fs::path& dir, const std::string& body) {
  const auto p = dir / "w.csv";
  std::ofstream(p) << cloudsim::kWorkloadHeader << '\n' << body;
  return p;
}

// Cheap parameterizations of every experiment, for the determinism checks.
std::vector<ExperimentConfig> small_configs(const fs::path& dir) {
  const auto w = write_workload(dir, "0,0,batch,1,2;3;4,0,0,3\n1,1,iterative,3,1,0.5,0.2,1\n2,1.5,standalone,1,2,0,0,1\n");
  std::ofstream(dir / "q.json") << R"({"n":3,"linear":{"0":-1,"1":0.5},"quadratic":{"0,2":-2},"constant":1})";
  return {
      config("walk", {{"kind", "reflecting"}, {"shots", 500}}, 3),
      config("walk", {{"kind", "absorbing"}, {"shots", 2000}}, 3),
      config("walk-noise", {{"trajectories", 300}}, 4),
      config("walk-anneal", {{"r", {2, 3}}, {"sa_r", 2}, {"reads", 10}, {"sweeps", 200}}, 5),
      config("mpmw-spectrum", json::object()),
      config("mpmw", {{"solver", "ssvqe-c"}, {"k", 1}, {"max_iters", 30}}, 6),
      config("mpmw", {{"solver", "qite"}, {"k", 2}, {"steps", 20}}),
      config("ssvqe", {{"k", {0, 1}}, {"max_iters", 30}, {"seeds", 2}}, 7),
      config("qite-lanczos", {{"steps", 40}, {"compare_iters", 20}, {"compare_seeds", 1}}, 8),
      config("pp", {{"train", 12}, {"test", 12}, {"epochs", 2}, {"strategy", "parallel"}, {"k", 3}}, 9),
      config("rbm-parallel", {{"k", {1, 4}}, {"seeds", 1}, {"train", 12}, {"test", 12}, {"epochs", 2}}, 10),
      config("lca", {{"steps", 4}, {"unroll", 2}, {"reads", 20}, {"sweeps", 200}}, 11),
      config("cloud", {{"workload", w.string()}, {"jitter", 0.2}}, 12),
      config("cloud-speedup", json::object()),
      config("qubo-solve", {{"input", (dir / "q.json").string()}, {"reads", 10}, {"sweeps", 100}}, 13),
      config("property-suite", {{"cases", 5}}, 14),
  };
}

}  // namespace

TEST(Registry, NonemptyAndUniquelyNamed) {
  ASSERT_FALSE(experiments().empty());
  ASSERT_FALSE(presets().empty());
  std::set<std::string> names;
  for (const auto& e : experiments()) EXPECT_TRUE(names.insert(e.name).second) << e.name;
  names.clear();
  for (const auto& p : presets()) EXPECT_TRUE(names.insert(p.name).second) << p.name;
}

TEST(Registry, EveryPresetValidates) {
  for (const auto& p : presets()) {
    SCOPED_TRACE(p.name);
    ExperimentConfig c;
    ASSERT_NO_THROW(c = p.experiment_config());
    EXPECT_NO_THROW(resolve(c));
    EXPECT_FALSE(c.output.empty());
  }
}

TEST(Registry, EveryCriterionNamesAPreset) {
  std::set<int> covered;
  for (const auto& p : presets()) {
    if (p.criterion) covered.insert(p.criterion);
  }
  for (int c = 1; c <= 10; ++c) EXPECT_TRUE(covered.count(c)) << "criterion " << c;
}

TEST(Registry, UnknownPresetAndExperiment) {
  EXPECT_THROW(find_preset("no-such"), std::invalid_argument);
  try {
    run(config("no-such", json::object()));
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("unknown experiment 'no-such'"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("walk"), std::string::npos);  // lists the known ones
  }
}

TEST(Config, MalformedJsonIsRejectedWithDiagnostic) {
  try {
    ExperimentConfig::parse(R"({"experiment": "walk", "seed": 1,)");
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("malformed JSON"), std::string::npos);
  }
  const auto dir = scratch("malformed");
  std::ofstream(dir / "bad.json") << "{not json";
  EXPECT_THROW(ExperimentConfig::load((dir / "bad.json").string()), std::invalid_argument);
  EXPECT_THROW(ExperimentConfig::load((dir / "missing.json").string()), std::runtime_error);
}

TEST(Config, SeedIsMandatory) {
  EXPECT_THROW(ExperimentConfig::parse(R"({"experiment": "walk"})"), std::invalid_argument);
  EXPECT_THROW(ExperimentConfig::parse(R"({"experiment": "walk", "seed": -1})"), std::invalid_argument);
  EXPECT_THROW(ExperimentConfig::parse(R"({"experiment": "walk", "seed": 1.5})"), std::invalid_argument);
  EXPECT_THROW(ExperimentConfig::parse(R"({"experiment": "walk", "seed": "1"})"), std::invalid_argument);
  EXPECT_EQ(ExperimentConfig::parse(R"({"experiment": "walk", "seed": 18446744073709551615})").seed, UINT64_MAX);
}

TEST(Config, StructuralErrors) {
  EXPECT_THROW(ExperimentConfig::parse("[1]"), std::invalid_argument);
  EXPECT_THROW(ExperimentConfig::parse(R"({"seed": 1})"), std::invalid_argument);
  EXPECT_THROW(ExperimentConfig::parse(R"({"experiment": "walk", "seed": 1, "extra": 0})"), std::invalid_argument);
  EXPECT_THROW(ExperimentConfig::parse(R"({"experiment": "walk", "seed": 1, "params": [1]})"), std::invalid_argument);
}

TEST(Config, ParametersAreChecked) {
  EXPECT_THROW(resolve(config("walk", {{"stats", 8}})), std::invalid_argument);          // typo
  EXPECT_THROW(resolve(config("walk", {{"states", "8"}})), std::invalid_argument);       // wrong kind
  EXPECT_THROW(resolve(config("walk-anneal", {{"r", {2, "x"}}})), std::invalid_argument);
  EXPECT_THROW(run(config("walk", {{"states", 8.5}})), std::invalid_argument);           // not an integer
  EXPECT_THROW(run(config("walk", {{"kind", "bouncy"}})), std::invalid_argument);        // not a choice
  EXPECT_THROW(run(config("walk", {{"steps", -1}})), std::invalid_argument);
  EXPECT_THROW(run(config("walk", {{"states", 6}})), std::invalid_argument);             // module error propagates
  EXPECT_THROW(run(config("cloud", json::object())), std::invalid_argument);             // workload required
  const auto r = resolve(config("walk", {{"shots", 10}}));
  EXPECT_EQ(r.params.at("shots"), 10);
  EXPECT_EQ(r.params.at("states"), 8);  // defaults filled in
}

TEST(Seed, EnvironmentOverridesConfig) {
  const auto base = config("walk", {{"kind", "absorbing"}, {"shots", 500}}, 3);
  {
    ScopedSeed s(nullptr);
    EXPECT_EQ(with_env_seed(base).seed, 3u);
  }
  {
    ScopedSeed s("");
    EXPECT_EQ(with_env_seed(base).seed, 3u);
  }
  {
    ScopedSeed s("41");
    const auto c = with_env_seed(base);
    EXPECT_EQ(c.seed, 41u);
    EXPECT_EQ(run(c).config.at("seed"), 41);
    EXPECT_NE(csvs(run(c)), csvs(run(base)));
  }
  for (const char* bad : {"x", "-3", "4 ", "1e3", "99999999999999999999999"}) {
    ScopedSeed s(bad);
    EXPECT_THROW(with_env_seed(base), std::invalid_argument) << bad;
  }
}

TEST(Determinism, RerunGivesByteIdenticalTables) {
  const auto dir = scratch("determinism");
  for (const auto& c : small_configs(dir)) {
    SCOPED_TRACE(c.experiment + " " + c.params.dump());
    const auto a = run(c), b = run(c);
    ASSERT_FALSE(a.tables.empty());
    EXPECT_EQ(csvs(a), csvs(b));
    EXPECT_EQ(a.metrics, b.metrics);
    EXPECT_EQ(a.input_hash, b.input_hash);
  }
}

TEST(Determinism, ConfigEchoReproducesTheRun) {
  const auto dir = scratch("echo");
  for (const auto& c : small_configs(dir)) {
    SCOPED_TRACE(c.experiment);
    const auto a = run(c);
    const auto again = ExperimentConfig::from_json(a.config);
    EXPECT_EQ(again.params, resolve(c).params);
    const auto b = run(again);
    EXPECT_EQ(csvs(a), csvs(b));
    EXPECT_EQ(a.input_hash, b.input_hash);
  }
}

TEST(Hash, GitBlobDigest) {
  // `printf 'hello\n' | git hash-object --stdin` and the empty blob.
  EXPECT_EQ(git_blob_hash("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
  EXPECT_EQ(git_blob_hash(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  EXPECT_EQ(sha1_hex("abc"), "a9993e364706816aba3e25717850c26c9cd0d89d");
}

TEST(Hash, CoversInputFilesButNotOutputPath) {
  const auto dir = scratch("hash");
  const auto w = write_workload(dir, "0,0,standalone,1,2,0,0,1\n");
  auto c = config("cloud", {{"workload", w.string()}});
  const auto h1 = run(c).input_hash;
  c.output = (dir / "out").string();
  EXPECT_EQ(run(c).input_hash, h1);
  write_workload(dir, "0,0,standalone,1,3,0,0,1\n");  // same path, new content
  c.output.clear();
  EXPECT_NE(run(c).input_hash, h1);
  auto d = c;
  d.seed = 1;
  EXPECT_NE(run(d).input_hash, run(c).input_hash);
  // Recomputable from the echo and the file content alone.
  const auto b = run(c);
  EXPECT_EQ(b.input_hash, git_blob_hash(b.config.dump() + "\n" + read_file(w)));
}

TEST(Bundle, WritesTablesAndSummary) {
  const auto dir = scratch("bundle");
  auto c = config("walk", {{"kind", "absorbing"}, {"shots", 300}}, 2);
  c.output = (dir / "out").string();
  const auto b = run(c);
  for (const auto& [name, t] : b.tables) {
    std::ifstream f(dir / "out" / (name + ".csv"));
    ASSERT_TRUE(f) << name;
    std::stringstream ss;
    ss << f.rdbuf();
    EXPECT_EQ(ss.str(), t.csv());
  }
  std::ifstream f(dir / "out" / "result.json");
  const auto j = json::parse(f);
  EXPECT_EQ(j.at("config"), b.config);
  EXPECT_EQ(j.at("config").at("output"), c.output);
  EXPECT_EQ(j.at("input_hash"), b.input_hash);
  EXPECT_EQ(j.at("input_hash").get<std::string>().size(), 40u);
  EXPECT_GE(j.at("runtime_s").get<double>(), 0.0);
  EXPECT_EQ(j.at("tables").size(), b.tables.size());
}

TEST(Table, CsvKeepsFullPrecisionAndChecksWidth) {
  Table t({"a", "b", "c"});
  t.add({0.1, 3, "x"});
  t.add({1.0 / 3.0, -2, true});
  const std::string s = t.csv();
  EXPECT_EQ(s.substr(0, 6), "a,b,c\n");
  std::istringstream is(s);
  std::string line;
  std::getline(is, line);
  std::getline(is, line);
  EXPECT_EQ(std::stod(line.substr(0, line.find(','))), 0.1);
  std::getline(is, line);
  EXPECT_EQ(std::stod(line.substr(0, line.find(','))), 1.0 / 3.0);
  EXPECT_NE(line.find(",-2,true"), std::string::npos);
  EXPECT_THROW(t.add({1, 2}), std::logic_error);
  EXPECT_EQ(t.column("b"), 1u);
  EXPECT_THROW(t.column("z"), std::out_of_range);
}

// Layout of the reflecting-walk preset, with values checked against a
// Taylor-series propagator built here from the dense Hamiltonian.
TEST(Presets, ReflectingWalkLayoutAndValues) {
  auto c = find_preset("walk-reflecting").experiment_config();
  c.output.clear();
  const auto b = run(c);
  const auto& t = b.tables.at("probabilities");
  ASSERT_EQ(t.columns, (std::vector<std::string>{"timestep", "state", "probability"}));
  ASSERT_EQ(t.rows.size(), 5u * 8u);

  const Matrix h = walks::walk_hamiltonian_dense(walks::WalkModel{});
  Matrix u = Matrix::Identity(8, 8), term = Matrix::Identity(8, 8);
  for (int k = 1; k < 60; ++k) {
    term = term * (-cplx(0, 1) * h) / static_cast<double>(k);
    u += term;
  }
  Vector psi = walks::default_initial_state(8).amplitudes();
  for (int s = 0; s <= 4; ++s) {
    double total = 0;
    for (int i = 0; i < 8; ++i) {
      const auto& row = t.rows[static_cast<std::size_t>(s * 8 + i)];
      EXPECT_EQ(row[0], s);
      EXPECT_EQ(row[1], i);
      EXPECT_NEAR(row[2].get<double>(), std::norm(psi(i)), 1e-10);
      total += row[2].get<double>();
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    psi = u * psi;
  }
}

TEST(Presets, PropertySuiteIsGreen) {
  auto c = find_preset("property-suite").experiment_config();
  c.output.clear();
  c.params["cases"] = 30;
  const auto b = run(c);
  EXPECT_TRUE(b.metrics.at("all_passed").get<bool>()) << b.metrics.dump();
  EXPECT_EQ(b.tables.at("properties").rows.size(), 7u);
}

// The reproduction guide lists each preset in one table row.
TEST(DocSync, ReadmePresetTableMatchesRegistry) {
  std::ifstream f(std::string(QUATRO_SOURCE_DIR) + "/README.md");
  ASSERT_TRUE(f) << "README.md missing";
  std::string line;
  bool in_section = false;
  std::set<std::string> listed;
  const std::regex row(R"(^\|\s*`([a-z0-9-]+)`\s*\|)");
  while (std::getline(f, line)) {
    if (line.rfind("## ", 0) == 0) in_section = line == "## Presets";
    std::smatch m;
    if (in_section && std::regex_search(line, m, row)) listed.insert(m[1]);
  }
  std::set<std::string> registered;
  for (const auto& p : presets()) registered.insert(p.name);
  EXPECT_EQ(listed.size(), presets().size());
  EXPECT_EQ(listed, registered);
}
