// gibbslab command line: run experiment configs, manage the result cache.
// Exit codes: 0 success, 2 validation, 3 numeric failure, 4 cache integrity.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "gibbslab/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"gibbslab: circle and symbolic low-temperature experiments"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", cache_action;
  int threads = 2;
  bool no_cache = false;

  auto* run = app.add_subcommand("run", "execute a JSON experiment config");
  run->add_option("--config", config_path, "path to the config JSON")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--threads", threads, "worker threads");
  run->add_flag("--no-cache", no_cache, "bypass the result cache");

  auto* cache = app.add_subcommand("cache", "inspect the result cache");
  cache->add_option("action", cache_action, "list | clear | verify")->required();
  cache->add_option("--out", out_dir, "output directory the cache lives under");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      auto cfg = gibbslab::harness::RunConfig::from_file(config_path);
      gibbslab::harness::RunOptions opts;
      opts.out_dir = out_dir;
      opts.threads = threads;
      opts.no_cache = no_cache;
      auto res = gibbslab::harness::cmd_run(cfg, opts);
      std::printf("%s: %zu artifact(s) in %s%s (%.2fs)\n", cfg.kind().c_str(),
                  res.artifacts.size(), out_dir.c_str(),
                  res.from_cache ? " [cache]" : "", res.wall_seconds);
      return 0;
    }
    return gibbslab::harness::cmd_cache(cache_action, out_dir);
  } catch (const gibbslab::harness::ValidationError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const gibbslab::harness::CacheIntegrityError& e) {
    std::fprintf(stderr, "cache error: %s\n", e.what());
    return 4;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return 3;
  }
}
