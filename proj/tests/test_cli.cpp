#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "scatlab/experiment.hpp"

using namespace scatlab;
using nlohmann::json;

namespace {

std::string temp_dir(const std::string& tag) {
  const auto p = std::filesystem::temp_directory_path() / ("scatlab_test_" + tag);
  std::filesystem::remove_all(p);
  return p.string();
}

}  // namespace

TEST_CASE("experiment catalog") {
  const auto& cat = list_experiments();
  CHECK(cat.size() == 10);
  std::vector<std::string> expected = {
      "equiv-check", "cover",   "spectrum",  "propagate",      "opnorm-growth",
      "heat-trace",  "wave-op", "smatrix",   "resolvent-cont", "hypotheses"};
  for (const auto& kind : expected) {
    bool found = false;
    for (const auto& e : cat)
      if (e.kind == kind) {
        found = true;
        CHECK(!e.description.empty());
      }
    CHECK(found);
  }
}

TEST_CASE("unknown kinds and schema violations are usage errors") {
  CHECK_THROWS_WITH_AS(run_experiment(json{{"kind", "nope"}}, temp_dir("bad")),
                       doctest::Contains("valid kinds"), UsageError);
  CHECK_THROWS_AS(run_experiment(json{{"foo", 1}}, temp_dir("bad2")), UsageError);
  // Missing required field names the path.
  CHECK_THROWS_WITH_AS(
      run_experiment(json{{"kind", "spectrum"}}, temp_dir("bad3")),
      doctest::Contains("config.end"), UsageError);
}

TEST_CASE("minimal spectrum pipeline") {
  json cfg = {{"kind", "spectrum"},
              {"end", {{"end_kind", "cylinder"}}},
              {"mode", 0},
              {"grid", {{"x_max", 10.0}, {"points", 200}}},
              {"eigen_count", 5}};
  const std::string dir = temp_dir("spectrum");
  auto rec = run_experiment(cfg, dir);
  CHECK(rec.all_passed());
  CHECK(std::filesystem::exists(dir + "/eigenvalues.csv"));
  CHECK(std::filesystem::exists(dir + "/record.json"));
  // Every artifact appears in the manifest with a digest.
  CHECK(rec.manifest.size() == 1);
  CHECK(!rec.manifest[0].second.empty());
  // The CSV has a header.
  std::ifstream f(dir + "/eigenvalues.csv");
  std::string header;
  std::getline(f, header);
  CHECK(header == "index,eigenvalue");
}

TEST_CASE("heat-trace with zero perturbation passes trivially") {
  json cfg = {{"kind", "heat-trace"},
              {"beta", {{"kind", "power_law"}, {"params", {{"a", 2.0}}}}},
              {"perturbation", {{"q_amp", 0.0}, {"type", "beta"}}},
              {"t", 1.0},
              {"dx", 0.5},
              {"L_list", {30.0, 60.0}}};
  auto rec = run_experiment(cfg, temp_dir("ht"));
  CHECK(rec.all_passed());
}

TEST_CASE("determinism: identical config reproduces identical digests") {
  json cfg = {{"kind", "cover"},
              {"seed", 777},
              {"cloud", {{"type", "hyperbolic"}, {"count", 400}, {"radius", 4.0}}},
              {"radius_fn", {{"type", "const"}, {"value", 0.5}}},
              {"a", 1.0}};
  auto r1 = run_experiment(cfg, temp_dir("cov1"));
  auto r2 = run_experiment(cfg, temp_dir("cov2"));
  REQUIRE(r1.manifest.size() == r2.manifest.size());
  for (std::size_t i = 0; i < r1.manifest.size(); ++i) {
    CHECK(r1.manifest[i].first == r2.manifest[i].first);
    CHECK(r1.manifest[i].second == r2.manifest[i].second);
  }
  CHECK(r1.all_passed());
}

TEST_CASE("equiv-check pipeline with an expected failure") {
  json cfg = {{"kind", "equiv-check"},
              {"base_end", "cusp"},
              {"n", 1},
              {"eps", 0.05},
              {"envelope", {{"type", "power"}, {"rate", 2.0}}},
              {"k", 2},
              {"beta", {{"kind", "power_law"}, {"params", {{"a", 3.0}}}}},
              {"expect_pass", false}};
  auto rec = run_experiment(cfg, temp_dir("eq"));
  CHECK(rec.all_passed());  // the failure was expected, so the verdict passes
}

TEST_CASE("smatrix pipeline emits the oracle column") {
  json cfg = {{"kind", "smatrix"},
              {"well", {{"v0", 4.0}, {"w", 1.0}}},
              {"lambda", {{"lo", 0.5}, {"hi", 2.0}, {"points", 31}}}};
  const std::string dir = temp_dir("sm");
  auto rec = run_experiment(cfg, dir);
  CHECK(rec.all_passed());
  std::ifstream f(dir + "/smatrix.csv");
  std::string header;
  std::getline(f, header);
  CHECK(header == "lambda,delta,re_s,im_s,delta_oracle");
}

TEST_CASE("config file round trip") {
  const std::string dir = temp_dir("file");
  std::filesystem::create_directories(dir);
  const std::string cfg_path = dir + "/config.json";
  {
    std::ofstream f(cfg_path);
    f << json{{"kind", "spectrum"},
              {"end", {{"end_kind", "cusp"}, {"n", 1}}},
              {"mode", 0},
              {"grid", {{"x_max", 12.0}, {"points", 150}}},
              {"out_dir", dir + "/out"}}
             .dump();
  }
  auto rec = run_experiment_file(cfg_path, "");
  CHECK(rec.all_passed());
  CHECK(std::filesystem::exists(dir + "/out/record.json"));
  CHECK_THROWS_AS(run_experiment_file(dir + "/missing.json", ""), UsageError);
}
