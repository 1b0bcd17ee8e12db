#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gibbslab/harness.hpp"

using namespace gibbslab::harness;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / ("gibbslab_ht_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("config parsing: canonical text and stable hash") {
  auto a = RunConfig::from_text(R"({"kind":"ladder","levels":3})");
  auto b = RunConfig::from_text("{\n \"levels\": 3, \"kind\": \"ladder\"\n}");
  CHECK(a.kind() == "ladder");
  CHECK(a.text == b.text);  // key order does not matter
  CHECK(a.hash() == b.hash());
  CHECK_THROWS_AS(RunConfig::from_text("{"), ValidationError);
  CHECK_THROWS_AS(RunConfig::from_text(R"({"no_kind":1})"), ValidationError);
}

TEST_CASE("unknown kind and malformed params are validation errors") {
  auto dir = fresh_dir("validate");
  RunOptions opts;
  opts.out_dir = dir.string();
  opts.no_cache = true;
  CHECK_THROWS_AS(cmd_run(RunConfig::from_text(R"({"kind":"nope"})"), opts),
                  ValidationError);
  CHECK_THROWS_AS(
      cmd_run(RunConfig::from_text(R"({"kind":"xy_sweep","betas":[]})"), opts),
      ValidationError);
  CHECK_THROWS_AS(
      cmd_run(RunConfig::from_text(
                  R"({"kind":"xy_sweep","beta":{"min":0.0,"max":1.0,"count":3}})"),
              opts),
      ValidationError);
  fs::remove_all(dir);
}

TEST_CASE("ladder run emits units header and a manifest with digests") {
  auto dir = fresh_dir("ladder");
  RunOptions opts;
  opts.out_dir = dir.string();
  opts.no_cache = true;
  auto res = cmd_run(RunConfig::from_text(R"({"kind":"ladder","levels":2})"), opts);
  REQUIRE(res.artifacts.size() == 2);
  auto csv = slurp(dir / "ladder.csv");
  CHECK(csv.rfind("m,gap,entropy_plus,entropy_minus", 0) == 0);  // nats per column doc
  auto manifest = slurp(dir / "manifest.json");
  CHECK(manifest.find("config_hash") != std::string::npos);
  CHECK(manifest.find("ladder.csv") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("cache: second run hits, verify matches, clear empties") {
  auto dir = fresh_dir("cache");
  RunOptions opts;
  opts.out_dir = dir.string();
  auto cfg = RunConfig::from_text(R"({"kind":"proof_replay","m0_max":3,"k_cap":4})");
  auto first = cmd_run(cfg, opts);
  CHECK_FALSE(first.from_cache);
  auto second = cmd_run(cfg, opts);
  CHECK(second.from_cache);
  CHECK(cmd_cache("verify", dir.string()) == 0);
  CHECK(cmd_cache("list", dir.string()) == 0);
  CHECK(cmd_cache("clear", dir.string()) == 0);
  auto third = cmd_run(cfg, opts);
  CHECK_FALSE(third.from_cache);
  fs::remove_all(dir);
}

TEST_CASE("cache verify flags a tampered artifact") {
  auto dir = fresh_dir("tamper");
  RunOptions opts;
  opts.out_dir = dir.string();
  auto cfg = RunConfig::from_text(R"({"kind":"ladder","levels":2})");
  auto res = cmd_run(cfg, opts);
  // corrupt the cached copy
  fs::path entry = dir / ".cache" / cfg.hash() / "ladder.csv";
  REQUIRE(fs::exists(entry));
  std::ofstream(entry, std::ios::app) << "tampered\n";
  CHECK_THROWS_AS(cmd_cache("verify", dir.string()), CacheIntegrityError);
  fs::remove_all(dir);
}

TEST_CASE("format_double round-trips shortest representations") {
  for (double v : {0.1, 1.0 / 3.0, 2.0, 1e-30, 123456.789}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("density and measure exports ride along their sweeps") {
  auto dir = fresh_dir("exports");
  RunOptions opts;
  opts.out_dir = dir.string();
  opts.no_cache = true;
  auto xy = cmd_run(RunConfig::from_text(
                        R"({"kind":"xy_sweep","m_max":2,
          "schedule":{"halfwidths":[0.0625,0.00048828125,1.9073486328125e-06],
                      "levels":[1.0,64.0,4096.0]},
          "signs":"constant+","beta":{"min":16.0,"max":64.0,"count":2},
          "density_samples":64})"),
                    opts);
  CHECK(std::count(xy.artifacts.begin(), xy.artifacts.end(), "density.csv") == 1);
  CHECK(slurp(dir / "density.csv").rfind("theta,log_density", 0) == 0);

  auto sym = cmd_run(RunConfig::from_text(
                         R"({"kind":"sym_sweep",
          "schedule":{"eps":[1.0,0.5],"beta":[24.0]},
          "signs":"constant+","beta":{"min":4.0,"max":24.0,"count":2},
          "measure_csv":true})"),
                     opts);
  CHECK(std::count(sym.artifacts.begin(), sym.artifacts.end(), "measure.csv") == 1);
  CHECK(slurp(dir / "measure.csv").rfind("word,weight", 0) == 0);
  fs::remove_all(dir);
}

TEST_CASE("laplace kind produces atoms for a cosine") {
  auto dir = fresh_dir("laplace");
  RunOptions opts;
  opts.out_dir = dir.string();
  opts.no_cache = true;
  auto res =
      cmd_run(RunConfig::from_text(R"({"kind":"laplace","cos":[1.0]})"), opts);
  auto csv = slurp(dir / "atoms.csv");
  CHECK(csv.rfind("theta,weight,order,omega", 0) == 0);
  CHECK(csv.find("\n0,1,2,") != std::string::npos);
  fs::remove_all(dir);
}
