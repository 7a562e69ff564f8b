#include <exception>
#include <omp.h>

#include "lup/lup.hpp"

namespace lup {

LeakReport leak_phase(const Oracle& oracle, std::span<const ImageTensor> leak_dataset,
                      const ObjectiveFactory& objective_factory, const SimbaConfig& simba_cfg,
                      std::uint64_t budget_per_image, int threads) {
  if (leak_dataset.empty()) throw ConfigError("leak dataset is empty");
  if (budget_per_image == 0) throw ConfigError("leak budget must be at least 1");
  simba_cfg.validate();

  const std::size_t n = leak_dataset.size();
  LeakReport report;
  report.per_image_outcomes.resize(n);
  report.objective_queries.resize(n, 0);
  std::vector<std::uint64_t> ledger_totals(n, 0);
  std::exception_ptr failure;

  const int nthreads = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(nthreads)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    try {
      QueryLedger ledger(budget_per_image);
      const AttackObjective objective = objective_factory(leak_dataset[idx], oracle, ledger);
      report.objective_queries[idx] = ledger.count();
      SimbaConfig cfg = simba_cfg;
      cfg.rng = simba_cfg.rng.substream(idx);
      report.per_image_outcomes[idx] = it_simba_attack(oracle, ledger, objective, leak_dataset[idx], cfg);
      ledger_totals[idx] = ledger.count();
    } catch (...) {
#pragma omp critical(lup_leak_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  for (std::size_t i = 0; i < n; ++i) {
    report.total_leak_queries += ledger_totals[i];
    report.perturbations.push_back(report.per_image_outcomes[i].eta);
  }
  report.basis = extract_components(report.perturbations);
  return report;
}

}  // namespace lup
