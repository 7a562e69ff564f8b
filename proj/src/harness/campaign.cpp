#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <omp.h>

#include "config_file.hpp"
#include "lup/btf.hpp"
#include "lup/harness.hpp"

namespace lup {
namespace {

using nlohmann::json;

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  return j[key].get<T>();
}

Dims dims_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ConfigError("dims must be [C,H,W]");
  return Dims{j[0].get<std::size_t>(), j[1].get<std::size_t>(), j[2].get<std::size_t>()};
}

SyntheticOracleSpec synthetic_from(const json& j) {
  SyntheticOracleSpec s;
  s.kind = parse_synthetic_kind(j.at("kind").get<std::string>());
  s.seed = get_or<std::uint64_t>(j, "seed", 0);
  if (j.contains("dims")) s.dims = dims_from(j["dims"]);
  if (j.contains("value_range")) {
    s.range = ValueRange{j["value_range"].at(0).get<double>(), j["value_range"].at(1).get<double>()};
  }
  s.affine.rank = get_or<std::size_t>(j, "rank", s.affine.rank);
  s.affine.scale = get_or<double>(j, "scale", s.affine.scale);
  s.affine.bias_scale = get_or<double>(j, "bias_scale", s.affine.bias_scale);
  s.blur.kernel_width = get_or<std::size_t>(j, "kernel_width", s.blur.kernel_width);
  s.blur.channel_offsets = get_or<std::vector<double>>(j, "channel_offsets", {});
  s.blur.offset_scale = get_or<double>(j, "offset_scale", s.blur.offset_scale);
  s.subspace.dim = get_or<std::size_t>(j, "subspace_dim", s.subspace.dim);
  s.subspace.gain = get_or<double>(j, "gain", s.subspace.gain);
  return s;
}

ObjectiveKind parse_objective_kind(std::string_view s) {
  if (s == "identity") return ObjectiveKind::identity;
  if (s == "max_distortion") return ObjectiveKind::max_distortion;
  if (s == "explicit_target") return ObjectiveKind::explicit_target;
  throw ConfigError("unknown objective '" + std::string(s) + "'");
}

std::string synthetic_id(std::size_t i) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "synthetic_%04zu", i);
  return buf;
}

}  // namespace

std::string_view to_string(AttackKind k) {
  switch (k) {
    case AttackKind::it_nes:
      return "it-nes";
    case AttackKind::it_bandits:
      return "it-bandits";
    case AttackKind::it_simba:
      return "it-simba";
    case AttackKind::lup_leak:
      return "lup-leak";
    case AttackKind::lup_exploit:
      return "lup-exploit";
  }
  return "unknown";
}

AttackKind parse_attack_kind(std::string_view s) {
  if (s == "it-nes") return AttackKind::it_nes;
  if (s == "it-bandits") return AttackKind::it_bandits;
  if (s == "it-simba") return AttackKind::it_simba;
  if (s == "lup-leak") return AttackKind::lup_leak;
  if (s == "lup-exploit") return AttackKind::lup_exploit;
  throw ConfigError("unknown attack '" + std::string(s) + "'");
}

std::string_view to_string(ObjectiveKind k) {
  switch (k) {
    case ObjectiveKind::identity:
      return "identity";
    case ObjectiveKind::max_distortion:
      return "max_distortion";
    case ObjectiveKind::explicit_target:
      return "explicit_target";
  }
  return "unknown";
}

AttackObjective build_objective(ObjectiveKind kind, const ImageTensor& x, const Oracle& oracle,
                                QueryLedger& ledger, const ObjectiveSettings& settings) {
  AttackObjective obj;
  obj.loss = settings.loss;
  obj.report_norm = settings.report_norm;
  obj.threshold = settings.tau;
  switch (kind) {
    case ObjectiveKind::identity:
      obj.target = x;
      obj.direction = Direction::minimize;
      break;
    case ObjectiveKind::max_distortion: {
      auto out = budgeted_query(ledger, oracle, x);
      if (!out) throw BudgetExhausted("no budget left to evaluate G(x) for the distortion target");
      obj.target = std::move(*out);
      obj.direction = Direction::maximize;
      break;
    }
    case ObjectiveKind::explicit_target:
      if (settings.target_path.empty() || !std::filesystem::exists(settings.target_path)) {
        throw ConfigError("target file '" + settings.target_path.string() + "' not found");
      }
      obj.target = btf::read_file(settings.target_path, oracle.value_range());
      obj.direction = Direction::minimize;
      break;
  }
  if (obj.target.dims() != oracle.output_dims()) {
    throw ShapeError("target dims " + obj.target.dims().to_string() + " differ from oracle output " +
                     oracle.output_dims().to_string());
  }
  obj.validate();
  return obj;
}

void CampaignConfig::validate() const {
  if (!oracle.synthetic && oracle.remote_endpoint.empty()) {
    throw ConfigError("config needs either a synthetic oracle or a remote endpoint");
  }
  if (oracle.synthetic) oracle.synthetic->validate();
  if (!(objective_settings.tau > 0.0)) throw ConfigError("tau must be positive");
  if (budget < 1) throw ConfigError("budget must be at least 1");
  if (dataset.directory.empty() && dataset.count < 1) throw ConfigError("dataset count must be at least 1");
  if (objective == ObjectiveKind::explicit_target && objective_settings.target_path.empty()) {
    throw ConfigError("explicit_target objective needs a 'target' file");
  }
  if (threads < 1) throw ConfigError("threads must be at least 1");
  if (!(histogram_bin_width > 0.0)) throw ConfigError("histogram_bin_width must be positive");
  if (!(simba_step > 0.0)) throw ConfigError("simba step must be positive");
  if (n_sat < 1) throw ConfigError("n_sat must be at least 1");
  nes.validate();
  if (attack == AttackKind::lup_exploit && components_dir.empty()) {
    throw ConfigError("lup-exploit needs a component bundle directory");
  }
}

CampaignConfig CampaignConfig::from_json(const json& j) {
  CampaignConfig c;
  try {
    const auto& o = j.at("oracle");
    if (o.contains("synthetic")) c.oracle.synthetic = synthetic_from(o["synthetic"]);
    if (o.contains("remote")) {
      const auto& r = o["remote"];
      if (r.is_string()) {
        c.oracle.remote_endpoint = r.get<std::string>();
      } else {
        c.oracle.remote_endpoint = r.at("endpoint").get<std::string>();
        c.oracle.remote.retries = get_or<int>(r, "retries", 0);
        c.oracle.remote.timeout_seconds = get_or<double>(r, "timeout_seconds", 30.0);
      }
    }
    c.attack = parse_attack_kind(j.at("attack").get<std::string>());
    c.objective = parse_objective_kind(get_or<std::string>(j, "objective", "identity"));
    c.objective_settings.loss = parse_loss_kind(get_or<std::string>(j, "loss", "mse"));
    c.objective_settings.report_norm = parse_norm_kind(get_or<std::string>(j, "report_norm", "l2"));
    c.objective_settings.tau = j.at("tau").get<double>();
    c.objective_settings.target_path = get_or<std::string>(j, "target", "");
    c.budget = get_or<std::uint64_t>(j, "budget", c.budget);
    if (j.contains("budget") && j["budget"].is_number_integer() && j["budget"].get<std::int64_t>() < 1) {
      throw ConfigError("budget must be at least 1");
    }
    const auto& d = j.at("dataset");
    if (d.contains("directory")) {
      c.dataset.directory = d["directory"].get<std::string>();
    } else {
      const auto& s = d.at("synthetic");
      c.dataset.count = s.at("count").get<std::size_t>();
      c.dataset.seed = get_or<std::uint64_t>(s, "seed", 0);
    }
    c.seed = get_or<std::uint64_t>(j, "seed", 0);
    if (j.contains("nes")) {
      const auto& n = j["nes"];
      c.nes.samples = get_or<std::size_t>(n, "samples", c.nes.samples);
      c.nes.sigma = get_or<double>(n, "sigma", c.nes.sigma);
      c.nes.step = get_or<double>(n, "step", c.nes.step);
      if (n.contains("per_step_clip") && !n["per_step_clip"].is_null()) {
        c.nes.per_step_clip = n["per_step_clip"].get<double>();
      }
    }
    if (j.contains("bandits")) {
      const auto& b = j["bandits"];
      c.bandits.prior_lr = get_or<double>(b, "prior_lr", c.bandits.prior_lr);
      c.bandits.image_lr = get_or<double>(b, "image_lr", c.bandits.image_lr);
      c.bandits.exploration = get_or<double>(b, "exploration", c.bandits.exploration);
      c.bandits.tile = get_or<std::size_t>(b, "tile", c.bandits.tile);
      c.bandits.fd_eta = get_or<double>(b, "fd_eta", c.bandits.fd_eta);
      const auto step = get_or<std::string>(b, "image_step", "sign");
      if (step != "sign" && step != "l2") throw ConfigError("bandits image_step must be sign or l2");
      c.bandits.image_step = step == "sign" ? BanditsImageStep::sign : BanditsImageStep::l2;
      const auto upd = get_or<std::string>(b, "prior_update", "gradient");
      if (upd != "gradient" && upd != "exponentiated") {
        throw ConfigError("bandits prior_update must be gradient or exponentiated");
      }
      c.bandits.prior_update =
          upd == "gradient" ? BanditsPriorUpdate::gradient : BanditsPriorUpdate::exponentiated;
    }
    if (j.contains("simba")) c.simba_step = get_or<double>(j["simba"], "step", c.simba_step);
    if (j.contains("lup")) {
      c.n_sat = get_or<std::size_t>(j["lup"], "n_sat", c.n_sat);
      c.components_dir = get_or<std::string>(j["lup"], "components", "");
    }
    c.output_dir = get_or<std::string>(j, "output_dir", "");
    c.threads = get_or<int>(j, "threads", 1);
    c.histogram_bin_width = get_or<double>(j, "histogram_bin_width", 25.0);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid campaign config: ") + e.what());
  }
  return c;
}

CampaignConfig CampaignConfig::load(const std::filesystem::path& path) {
  const json j = detail::read_config_tree(path);
  CampaignConfig c = from_json(j);
  // Relative paths inside a config file are relative to that file.
  const auto base = path.parent_path();
  auto rebase = [&](std::filesystem::path& p) {
    if (!p.empty() && p.is_relative()) p = base / p;
  };
  rebase(c.dataset.directory);
  rebase(c.objective_settings.target_path);
  rebase(c.components_dir);
  rebase(c.output_dir);
  return c;
}

RngStream image_stream(std::uint64_t seed, std::size_t index) {
  return RngStream(seed, 0).substream(index);
}

OracleHandle make_oracle(const OracleConfig& cfg) {
  if (cfg.synthetic) return make_synthetic_oracle(*cfg.synthetic);
  if (!cfg.remote_endpoint.empty()) return remote_oracle(cfg.remote_endpoint, cfg.remote);
  throw ConfigError("no oracle configured");
}

std::vector<ImageTensor> load_dataset(const CampaignConfig& cfg, Dims dims, ValueRange range,
                                      std::vector<std::string>* ids) {
  if (!cfg.dataset.directory.empty()) return load_dataset_dir(cfg.dataset.directory, range, ids);
  auto images = make_synthetic_dataset({dims, range, cfg.dataset.count, cfg.dataset.seed});
  if (ids) {
    for (std::size_t i = 0; i < images.size(); ++i) ids->push_back(synthetic_id(i));
  }
  return images;
}

CampaignReport run_campaign(const CampaignConfig& cfg) {
  cfg.validate();
  return run_campaign(cfg, make_oracle(cfg.oracle));
}

CampaignReport run_campaign(const CampaignConfig& cfg, OracleHandle base_oracle) {
  cfg.validate();
  const auto oracle = std::make_shared<CountingOracle>(std::move(base_oracle));
  const ValueRange range = oracle->value_range();

  std::vector<std::string> ids;
  const std::vector<ImageTensor> images = load_dataset(cfg, oracle->input_dims(), range, &ids);
  for (const auto& img : images) {
    if (img.dims() != oracle->input_dims()) {
      throw ConfigError("dataset image dims " + img.dims().to_string() + " differ from oracle input " +
                        oracle->input_dims().to_string());
    }
  }

  const ObjectiveFactory factory = [&](const ImageTensor& x, const Oracle& o, QueryLedger& ledger) {
    return build_objective(cfg.objective, x, o, ledger, cfg.objective_settings);
  };

  std::vector<ImageRecord> records(images.size());

  if (cfg.attack == AttackKind::lup_leak) {
    SimbaConfig simba{cfg.simba_step, RngStream(cfg.seed, 0)};
    LeakReport leak = leak_phase(*oracle, images, factory, simba, cfg.budget, cfg.threads);
    for (std::size_t i = 0; i < images.size(); ++i) {
      records[i] = make_record(i, ids[i], leak.per_image_outcomes[i], leak.objective_queries[i],
                               cfg.objective_settings.report_norm);
    }
    if (!cfg.components_dir.empty()) {
      BundleManifest manifest;
      manifest.dims = oracle->input_dims();
      manifest.explained_variance = leak.basis.explained_variance;
      manifest.leak_queries = leak.total_leak_queries;
      manifest.seed = cfg.seed;
      save_bundle(cfg.components_dir, leak.basis, manifest);
    }
  } else {
    std::vector<ImageTensor> components;
    if (cfg.attack == AttackKind::lup_exploit) {
      ComponentBundle bundle = load_bundle(cfg.components_dir, range);
      if (bundle.manifest.dims != oracle->input_dims()) {
        throw ConfigError("component bundle dims " + bundle.manifest.dims.to_string() +
                          " differ from oracle input " + oracle->input_dims().to_string());
      }
      components = std::move(bundle.components);
    }

    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1) num_threads(cfg.threads)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(images.size()); ++i) {
      const auto idx = static_cast<std::size_t>(i);
      QueryLedger ledger(cfg.budget);
      std::uint64_t objective_queries = 0;
      try {
        const AttackObjective objective = factory(images[idx], *oracle, ledger);
        objective_queries = ledger.count();
        const RngStream rng = image_stream(cfg.seed, idx);
        AttackOutcome outcome;
        switch (cfg.attack) {
          case AttackKind::it_nes:
            outcome = it_nes_attack(*oracle, ledger, objective, images[idx], cfg.nes, rng);
            break;
          case AttackKind::it_bandits:
            outcome = it_bandits_attack(*oracle, ledger, objective, images[idx], cfg.bandits, rng);
            break;
          case AttackKind::it_simba:
            outcome = it_simba_attack(*oracle, ledger, objective, images[idx], SimbaConfig{cfg.simba_step, rng});
            break;
          case AttackKind::lup_exploit:
            outcome = exploit_phase(*oracle, ledger, objective, images[idx], components,
                                    ExploitConfig{cfg.simba_step, cfg.n_sat, rng});
            break;
          case AttackKind::lup_leak:
            break;
        }
        records[idx] = make_record(idx, ids[idx], outcome, objective_queries,
                                   cfg.objective_settings.report_norm);
      } catch (const TransportError& e) {
        ImageRecord r;
        r.index = idx;
        r.image_id = ids[idx];
        r.objective_queries = objective_queries;
        r.queries_used = ledger.count() - objective_queries;
        r.final_loss = std::nan("");
        r.status = "transport_error";
        r.error = e.what();
        records[idx] = std::move(r);
      } catch (...) {
#pragma omp critical(lup_campaign_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  }

  CampaignReport report = summarize(records, cfg.histogram_bin_width);
  report.attack = std::string(to_string(cfg.attack));
  report.oracle_invocations = oracle->calls();
  if (!cfg.output_dir.empty()) write_report_files(cfg.output_dir, report);
  return report;
}

}  // namespace lup
