// attack: command-line front end for black-box attack campaigns.
//
//   attack run --config <file>
//   attack leak --config <file> --out <bundle-dir>
//   attack exploit --config <file> --components <bundle-dir>
//   attack report --in <dir>
//   attack project-queries --leak N --mean M --count K
//
// Exit codes: 0 success, 2 configuration error, 3 oracle transport failure, 1 otherwise.
// LUP_LOG_LEVEL=quiet|info|debug controls stderr chatter.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lup/harness.hpp"

namespace {

enum class LogLevel { quiet, info, debug };

LogLevel log_level() {
  const char* env = std::getenv("LUP_LOG_LEVEL");
  const std::string v = env ? env : "info";
  if (v == "quiet" || v == "error") return LogLevel::quiet;
  if (v == "debug") return LogLevel::debug;
  return LogLevel::info;
}

void log_info(const std::string& msg) {
  if (log_level() != LogLevel::quiet) std::cerr << msg << '\n';
}

void print_summary(const lup::CampaignReport& r) {
  std::printf("attack=%s images=%zu success_rate=%.2f%% mean_queries=%.2f mean_norm=%.4f total_queries=%llu\n",
              r.attack.c_str(), r.images, r.success_rate, r.mean_queries, r.mean_norm,
              static_cast<unsigned long long>(r.total_queries));
  if (log_level() == LogLevel::debug) {
    for (const auto& rec : r.per_image) {
      std::fprintf(stderr, "  %s queries=%llu success=%d loss=%.6g status=%s\n", rec.image_id.c_str(),
                   static_cast<unsigned long long>(rec.queries_used), rec.success ? 1 : 0,
                   rec.final_loss, rec.status.c_str());
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Query-budgeted black-box attacks on image translation oracles"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string components_dir;
  std::string in_dir;
  std::uint64_t leak_queries = 0;
  double mean_queries = 0.0;
  std::uint64_t dataset_count = 0;

  auto* run = app.add_subcommand("run", "Run the campaign described by a config file");
  run->add_option("--config", config_path, "Campaign config (JSON, or TOML by .toml extension)")->required();

  auto* leak = app.add_subcommand("leak", "Leaking phase: attack the leak set and store PCA components");
  leak->add_option("--config", config_path, "Campaign config (JSON, or TOML by .toml extension)")->required();
  leak->add_option("--out", out_dir, "Component bundle directory")->required();

  auto* exploit = app.add_subcommand("exploit", "Exploitation phase using a stored component bundle");
  exploit->add_option("--config", config_path, "Campaign config (JSON, or TOML by .toml extension)")->required();
  exploit->add_option("--components", components_dir, "Component bundle directory")->required();

  auto* report = app.add_subcommand("report", "Recompute summaries from per-image records");
  report->add_option("--in", in_dir, "Campaign output directory")->required();

  auto* project = app.add_subcommand("project-queries", "Total queries = leak + count * mean");
  project->add_option("--leak", leak_queries, "Leaking-phase queries")->required();
  project->add_option("--mean", mean_queries, "Mean exploitation queries per image")->required();
  project->add_option("--count", dataset_count, "Number of images to attack")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*project) {
      if (mean_queries < 0.0) throw lup::ConfigError("--mean must be nonnegative");
      std::printf("%.17g\n", lup::project_total_queries(leak_queries, mean_queries, dataset_count));
      return 0;
    }
    if (*report) {
      print_summary(lup::recompute_report(in_dir));
      return 0;
    }

    lup::CampaignConfig cfg = lup::CampaignConfig::load(config_path);
    if (*leak) {
      cfg.attack = lup::AttackKind::lup_leak;
      cfg.components_dir = out_dir;
    } else if (*exploit) {
      cfg.attack = lup::AttackKind::lup_exploit;
      cfg.components_dir = components_dir;
    }
    cfg.validate();
    log_info("running " + std::string(lup::to_string(cfg.attack)) + " campaign");
    const auto result = lup::run_campaign(cfg);
    print_summary(result);
    if (*leak) log_info("component bundle written to " + out_dir);
    return 0;
  } catch (const lup::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const lup::TransportError& e) {
    std::cerr << "transport error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
