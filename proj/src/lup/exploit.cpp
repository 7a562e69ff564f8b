#include <cmath>

#include "lup/lup.hpp"

namespace lup {

void ExploitConfig::validate() const {
  if (!(step > 0.0) || !std::isfinite(step)) throw ConfigError("exploit step must be positive");
  if (n_sat < 1) throw ConfigError("n_sat must be at least 1");
}

AttackOutcome exploit_phase(const Oracle& oracle, QueryLedger& ledger,
                            const AttackObjective& objective, const ImageTensor& x,
                            std::span<const ImageTensor> components, const ExploitConfig& cfg) {
  cfg.validate();
  for (const auto& q : components) require_same_dims(x, q, "exploit_phase component");
  ComponentSource leaked(components);
  PixelBasisSource fallback(x.dims(), cfg.fallback_basis_rng);
  return exploit_phase(oracle, ledger, objective, x, leaked, fallback, cfg.step, cfg.n_sat);
}

AttackOutcome exploit_phase(const Oracle& oracle, QueryLedger& ledger,
                            const AttackObjective& objective, const ImageTensor& x,
                            CandidateSource& leaked, CandidateSource& fallback, double step,
                            std::size_t n_sat) {
  objective.validate();
  if (!(step > 0.0)) throw ConfigError("exploit step must be positive");
  if (n_sat < 1) throw ConfigError("n_sat must be at least 1");
  const std::uint64_t start = ledger.count();

  AttackOutcome outcome;
  outcome.eta = ImageTensor(x.dims(), x.range());
  auto baseline = detail::probe_loss(oracle, ledger, objective, x);
  if (!baseline) {
    outcome.final_loss = std::nan("");
    return outcome;
  }
  double loss = *baseline;
  outcome.loss_trace.push_back({ledger.count(), loss});

  bool phase_two = false;
  auto engage_fallback = [&] {
    phase_two = true;
    outcome.fallback_engaged = true;
    outcome.fallback_at_query = ledger.count() - start;
  };

  const float alphas[2] = {static_cast<float>(step), -static_cast<float>(step)};
  std::size_t failed_probes = 0;  // consecutive rejected probes since the last commit
  bool out_of_budget = false;
  while (!success_holds(loss, objective) && !out_of_budget) {
    if (ledger.exhausted()) break;
    std::optional<Candidate> q;
    if (!phase_two) {
      q = leaked.next();
      if (!q) engage_fallback();
    }
    if (phase_two) {
      q = fallback.next();
      if (!q) break;
    }
    for (float alpha : alphas) {
      ImageTensor probe = x + outcome.eta;
      q->add_to(probe, alpha);
      const auto l = detail::probe_loss(oracle, ledger, objective, probe);
      if (!l) {
        out_of_budget = true;
        break;
      }
      if (improves(*l, loss, objective.direction)) {
        q->add_to(outcome.eta, alpha);
        loss = *l;
        outcome.loss_trace.push_back({ledger.count(), loss});
        failed_probes = 0;
        break;
      }
      ++failed_probes;
    }
    // failed_probes > 0 keeps a candidate that just committed from tripping n_sat = 1.
    if (!phase_two && failed_probes > 0 && failed_probes + 1 >= n_sat) engage_fallback();
  }

  outcome.queries_used = ledger.count() - start;
  outcome.final_loss = loss;
  outcome.success = success_holds(loss, objective);
  return outcome;
}

double project_total_queries(std::uint64_t leak_queries, double mean_exploit_queries,
                             std::uint64_t dataset_size) {
  return static_cast<double>(leak_queries) +
         static_cast<double>(dataset_size) * mean_exploit_queries;
}

}  // namespace lup
