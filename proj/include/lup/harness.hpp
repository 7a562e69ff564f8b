#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lup/attacks.hpp"
#include "lup/lup.hpp"
#include "lup/remote_oracle.hpp"
#include "lup/synthetic_oracle.hpp"

namespace lup {

enum class AttackKind { it_nes, it_bandits, it_simba, lup_leak, lup_exploit };
enum class ObjectiveKind { identity, max_distortion, explicit_target };

std::string_view to_string(AttackKind k);
AttackKind parse_attack_kind(std::string_view s);
std::string_view to_string(ObjectiveKind k);

// ---------------------------------------------------------------------------------------
// Datasets

struct SyntheticDatasetSpec {
  Dims dims{3, 32, 32};
  ValueRange range{};
  std::size_t count = 1;
  std::uint64_t seed = 0;
};

/// Smooth seeded images (low-frequency cosine mixtures) inside the value range.
std::vector<ImageTensor> make_synthetic_dataset(const SyntheticDatasetSpec& spec);

/// Every *.btf file in `dir`, sorted by file name. `ids` receives the file stems.
std::vector<ImageTensor> load_dataset_dir(const std::filesystem::path& dir, ValueRange range,
                                          std::vector<std::string>* ids = nullptr);
void write_dataset_dir(const std::filesystem::path& dir, std::span<const ImageTensor> images);

// ---------------------------------------------------------------------------------------
// Objectives

struct ObjectiveSettings {
  LossKind loss = LossKind::mse;
  NormKind report_norm = NormKind::l2;
  double tau = 0.005;
  std::filesystem::path target_path;  // explicit_target only
};

/// identity: r = x, minimize, no queries. max_distortion: r = G(x) from one budgeted
/// query, maximize. explicit_target: r read from a BTF1 file, minimize.
AttackObjective build_objective(ObjectiveKind kind, const ImageTensor& x, const Oracle& oracle,
                                QueryLedger& ledger, const ObjectiveSettings& settings);

// ---------------------------------------------------------------------------------------
// Reporting

struct ImageRecord {
  std::size_t index = 0;
  std::string image_id;
  std::uint64_t queries_used = 0;       // attack queries, objective construction excluded
  std::uint64_t objective_queries = 0;
  bool success = false;
  double final_loss = 0.0;
  double norm = 0.0;
  bool fallback_engaged = false;
  std::uint64_t fallback_at_query = 0;
  std::string status = "ok";
  std::string error;
};

ImageRecord make_record(std::size_t index, std::string image_id, const AttackOutcome& outcome,
                        std::uint64_t objective_queries, NormKind report_norm);

struct CampaignReport {
  std::string attack;
  std::size_t images = 0;
  std::size_t successes = 0;
  double mean_queries = 0.0;             // over every attack, failures at their ledger count
  double mean_queries_successful = 0.0;  // over successful attacks only
  double mean_norm = 0.0;                // over successful attacks only
  double success_rate = 0.0;             // percent
  double histogram_bin_width = 25.0;
  std::vector<std::uint64_t> histogram;  // bin k counts successes with k*w <= q < (k+1)*w
  std::vector<std::pair<std::uint64_t, double>> cumulative_success;  // (queries, fraction)
  std::uint64_t total_queries = 0;       // attack plus objective queries
  std::optional<std::uint64_t> oracle_invocations;
  std::vector<ImageRecord> per_image;
};

CampaignReport summarize(std::span<const ImageRecord> records, double bin_width = 25.0);

nlohmann::ordered_json to_json(const ImageRecord& r);
ImageRecord record_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const CampaignReport& report);

/// report.json, histogram.csv, cumulative.csv and records/image_NNNN.json under `dir`.
void write_report_files(const std::filesystem::path& dir, const CampaignReport& report);

/// Re-reads records/ under `dir`, recomputes the summaries and rewrites the report files.
CampaignReport recompute_report(const std::filesystem::path& dir);

// ---------------------------------------------------------------------------------------
// Campaigns

struct OracleConfig {
  std::optional<SyntheticOracleSpec> synthetic;
  std::string remote_endpoint;
  RemoteOracleOptions remote{};
};

struct DatasetConfig {
  std::filesystem::path directory;  // empty: synthetic
  std::size_t count = 0;
  std::uint64_t seed = 0;
};

struct CampaignConfig {
  OracleConfig oracle;
  AttackKind attack = AttackKind::it_simba;
  ObjectiveKind objective = ObjectiveKind::identity;
  ObjectiveSettings objective_settings;
  std::uint64_t budget = 10000;
  DatasetConfig dataset;
  std::uint64_t seed = 0;
  NesConfig nes;
  BanditsConfig bandits;
  double simba_step = 0.4;
  std::size_t n_sat = 20;
  std::filesystem::path components_dir;  // lup-exploit input, lup-leak output
  std::filesystem::path output_dir;      // empty: nothing written
  int threads = 1;
  double histogram_bin_width = 25.0;

  void validate() const;
  static CampaignConfig from_json(const nlohmann::json& j);
  static CampaignConfig load(const std::filesystem::path& path);
};

/// Per-image random stream shared by every attack so paired runs see the same basis order.
RngStream image_stream(std::uint64_t seed, std::size_t index);

OracleHandle make_oracle(const OracleConfig& cfg);
/// The configured dataset directory, or the synthetic dataset at `dims`.
std::vector<ImageTensor> load_dataset(const CampaignConfig& cfg, Dims dims, ValueRange range,
                                      std::vector<std::string>* ids = nullptr);

/// Attacks every image with a fresh ledger and aggregates the report. For lup-leak the
/// component bundle is written to cfg.components_dir (when set).
CampaignReport run_campaign(const CampaignConfig& cfg);

/// run_campaign with an already-built oracle.
CampaignReport run_campaign(const CampaignConfig& cfg, OracleHandle oracle);

}  // namespace lup
