#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "lup/harness.hpp"

namespace lup {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string record_file(std::size_t index) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "image_%04zu.json", index);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

// %.17g keeps CSV values round-trippable and byte-stable.
std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

ImageRecord make_record(std::size_t index, std::string image_id, const AttackOutcome& outcome,
                        std::uint64_t objective_queries, NormKind report_norm) {
  ImageRecord r;
  r.index = index;
  r.image_id = std::move(image_id);
  r.queries_used = outcome.queries_used;
  r.objective_queries = objective_queries;
  r.success = outcome.success;
  r.final_loss = outcome.final_loss;
  r.norm = outcome.eta.empty() ? 0.0 : perturbation_norm(outcome.eta, report_norm);
  r.fallback_engaged = outcome.fallback_engaged;
  r.fallback_at_query = outcome.fallback_at_query;
  return r;
}

CampaignReport summarize(std::span<const ImageRecord> records, double bin_width) {
  if (records.empty()) throw ConfigError("cannot summarize an empty campaign");
  if (!(bin_width > 0.0)) throw ConfigError("histogram bin width must be positive");

  CampaignReport report;
  report.images = records.size();
  report.histogram_bin_width = bin_width;
  report.per_image.assign(records.begin(), records.end());

  double queries = 0.0;
  double success_queries = 0.0;
  double norms = 0.0;
  std::map<std::uint64_t, std::size_t> success_at;
  for (const auto& r : records) {
    queries += static_cast<double>(r.queries_used);
    report.total_queries += r.queries_used + r.objective_queries;
    if (!r.success) continue;
    ++report.successes;
    success_queries += static_cast<double>(r.queries_used);
    norms += r.norm;
    ++success_at[r.queries_used];
    const auto bin = static_cast<std::size_t>(std::floor(static_cast<double>(r.queries_used) / bin_width));
    if (report.histogram.size() <= bin) report.histogram.resize(bin + 1, 0);
    ++report.histogram[bin];
  }

  const auto n = static_cast<double>(report.images);
  report.mean_queries = queries / n;
  report.success_rate = 100.0 * static_cast<double>(report.successes) / n;
  if (report.successes > 0) {
    report.mean_queries_successful = success_queries / static_cast<double>(report.successes);
    report.mean_norm = norms / static_cast<double>(report.successes);
  }
  std::size_t running = 0;
  for (const auto& [q, count] : success_at) {
    running += count;
    report.cumulative_success.emplace_back(q, static_cast<double>(running) / n);
  }
  return report;
}

ordered_json to_json(const ImageRecord& r) {
  ordered_json j;
  j["index"] = r.index;
  j["image_id"] = r.image_id;
  j["queries_used"] = r.queries_used;
  j["objective_queries"] = r.objective_queries;
  j["success"] = r.success;
  j["final_loss"] = std::isfinite(r.final_loss) ? ordered_json(r.final_loss) : ordered_json(nullptr);
  j["norm"] = r.norm;
  j["fallback_engaged"] = r.fallback_engaged;
  j["fallback_at_query"] = r.fallback_at_query;
  j["status"] = r.status;
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

ImageRecord record_from_json(const nlohmann::json& j) {
  ImageRecord r;
  try {
    r.index = j.at("index").get<std::size_t>();
    r.image_id = j.at("image_id").get<std::string>();
    r.queries_used = j.at("queries_used").get<std::uint64_t>();
    r.objective_queries = j.value("objective_queries", std::uint64_t{0});
    r.success = j.at("success").get<bool>();
    r.final_loss = j.at("final_loss").is_null() ? std::nan("") : j.at("final_loss").get<double>();
    r.norm = j.at("norm").get<double>();
    r.fallback_engaged = j.value("fallback_engaged", false);
    r.fallback_at_query = j.value("fallback_at_query", std::uint64_t{0});
    r.status = j.value("status", std::string("ok"));
    r.error = j.value("error", std::string());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed image record: ") + e.what());
  }
  return r;
}

ordered_json to_json(const CampaignReport& report) {
  ordered_json j;
  j["attack"] = report.attack;
  j["images"] = report.images;
  j["successes"] = report.successes;
  j["mean_queries"] = report.mean_queries;
  j["mean_queries_successful"] = report.mean_queries_successful;
  j["mean_norm"] = report.mean_norm;
  j["success_rate"] = report.success_rate;
  j["total_queries"] = report.total_queries;
  if (report.oracle_invocations) j["oracle_invocations"] = *report.oracle_invocations;
  j["histogram_bin_width"] = report.histogram_bin_width;
  j["histogram"] = report.histogram;
  auto curve = ordered_json::array();
  for (const auto& [q, f] : report.cumulative_success) curve.push_back({q, f});
  j["cumulative_success"] = curve;
  auto per_image = ordered_json::array();
  for (const auto& r : report.per_image) per_image.push_back(to_json(r));
  j["per_image"] = per_image;
  return j;
}

void write_report_files(const std::filesystem::path& dir, const CampaignReport& report) {
  std::filesystem::create_directories(dir / "records");
  for (const auto& r : report.per_image) {
    write_text(dir / "records" / record_file(r.index), to_json(r).dump(2) + "\n");
  }
  write_text(dir / "report.json", to_json(report).dump(2) + "\n");

  std::string hist = "bin_lo,bin_hi,count\n";
  for (std::size_t k = 0; k < report.histogram.size(); ++k) {
    hist += fmt_double(static_cast<double>(k) * report.histogram_bin_width) + "," +
            fmt_double(static_cast<double>(k + 1) * report.histogram_bin_width) + "," +
            std::to_string(report.histogram[k]) + "\n";
  }
  write_text(dir / "histogram.csv", hist);

  std::string curve = "queries,fraction\n";
  for (const auto& [q, f] : report.cumulative_success) {
    curve += std::to_string(q) + "," + fmt_double(f) + "\n";
  }
  write_text(dir / "cumulative.csv", curve);
}

CampaignReport recompute_report(const std::filesystem::path& dir) {
  const auto records_dir = dir / "records";
  if (!std::filesystem::is_directory(records_dir)) {
    throw ConfigError("no records/ directory under " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(records_dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<ImageRecord> records;
  for (const auto& f : files) {
    std::ifstream in(f);
    try {
      records.push_back(record_from_json(nlohmann::json::parse(in)));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("cannot parse " + f.string() + ": " + e.what());
    }
  }
  std::sort(records.begin(), records.end(),
            [](const ImageRecord& a, const ImageRecord& b) { return a.index < b.index; });

  double bin_width = 25.0;
  std::string attack;
  std::optional<std::uint64_t> invocations;
  if (std::ifstream prev(dir / "report.json"); prev) {
    try {
      const auto j = nlohmann::json::parse(prev);
      bin_width = j.value("histogram_bin_width", bin_width);
      attack = j.value("attack", std::string());
      if (j.contains("oracle_invocations")) invocations = j["oracle_invocations"].get<std::uint64_t>();
    } catch (const nlohmann::json::exception&) {
      // A broken report.json is simply regenerated.
    }
  }
  CampaignReport report = summarize(records, bin_width);
  report.attack = attack;
  report.oracle_invocations = invocations;
  write_report_files(dir, report);
  return report;
}

}  // namespace lup
