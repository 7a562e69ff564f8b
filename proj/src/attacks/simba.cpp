#include <cmath>

#include "lup/attacks.hpp"

namespace lup {

void SimbaConfig::validate() const {
  if (!(step > 0.0) || !std::isfinite(step)) throw ConfigError("SimBA step must be positive");
}

AttackOutcome it_simba_attack(const Oracle& oracle, QueryLedger& ledger,
                              const AttackObjective& objective, const ImageTensor& x,
                              const SimbaConfig& cfg) {
  cfg.validate();
  PixelBasisSource basis(x.dims(), cfg.rng);
  return it_simba_attack(oracle, ledger, objective, x, cfg.step, basis);
}

AttackOutcome it_simba_attack(const Oracle& oracle, QueryLedger& ledger,
                              const AttackObjective& objective, const ImageTensor& x, double step,
                              CandidateSource& candidates) {
  objective.validate();
  if (!(step > 0.0)) throw ConfigError("SimBA step must be positive");
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

  const float alphas[2] = {static_cast<float>(step), -static_cast<float>(step)};
  bool out_of_budget = false;
  while (!success_holds(loss, objective) && !out_of_budget) {
    if (ledger.exhausted()) break;
    const auto q = candidates.next();
    if (!q) break;
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
        break;
      }
    }
  }

  outcome.queries_used = ledger.count() - start;
  outcome.final_loss = loss;
  outcome.success = success_holds(loss, objective);
  return outcome;
}

}  // namespace lup
