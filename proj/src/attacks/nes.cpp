#include <algorithm>
#include <cmath>

#include "lup/attacks.hpp"

namespace lup {

void NesConfig::validate() const {
  if (samples == 0 || samples % 2 != 0) throw ConfigError("NES sample count must be even and positive");
  if (!(sigma > 0.0)) throw ConfigError("NES sigma must be positive");
  if (!(step > 0.0)) throw ConfigError("NES step must be positive");
  if (per_step_clip && !(*per_step_clip > 0.0)) throw ConfigError("NES per_step_clip must be positive");
}

std::optional<ImageTensor> nes_gradient_estimate(const Oracle& oracle, QueryLedger& ledger,
                                                 const AttackObjective& objective,
                                                 const ImageTensor& point, const NesConfig& cfg,
                                                 RngStream& rng) {
  cfg.validate();
  if (ledger.remaining() < cfg.samples) return std::nullopt;

  const std::size_t half = cfg.samples / 2;
  std::vector<ImageTensor> deltas;
  deltas.reserve(half);
  for (std::size_t i = 0; i < half; ++i) deltas.push_back(sample_gaussian(point.dims(), rng, point.range()));

  // Probe i uses delta_i for i < n/2 and -delta_{n-1-i} afterwards, i.e. the order
  // +d1, +d2, ..., -d2, -d1.
  std::vector<double> acc(point.size(), 0.0);
  const auto sigma = static_cast<float>(cfg.sigma);
  for (std::size_t i = 0; i < cfg.samples; ++i) {
    const bool mirrored = i >= half;
    const ImageTensor& delta = mirrored ? deltas[cfg.samples - 1 - i] : deltas[i];
    const float sign = mirrored ? -1.0f : 1.0f;
    ImageTensor probe = point;
    probe.add_scaled(sign * sigma, delta);
    const auto loss = detail::probe_loss(oracle, ledger, objective, probe);
    if (!loss) return std::nullopt;  // unreachable: budget was checked up front
    const double w = static_cast<double>(sign) * *loss;
    const auto d = delta.data();
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += w * d[k];
  }

  const double norm = 1.0 / (cfg.sigma * static_cast<double>(cfg.samples));
  std::vector<float> out(acc.size());
  std::transform(acc.begin(), acc.end(), out.begin(),
                 [norm](double v) { return static_cast<float>(v * norm); });
  return ImageTensor(point.dims(), std::move(out), point.range());
}

AttackOutcome it_nes_attack(const Oracle& oracle, QueryLedger& ledger,
                            const AttackObjective& objective, const ImageTensor& x,
                            const NesConfig& cfg, RngStream rng) {
  cfg.validate();
  objective.validate();
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

  // Descend for minimize, ascend for maximize.
  const float direction = objective.direction == Direction::minimize ? -1.0f : 1.0f;
  // One iteration is n estimate queries plus the trace query; never start one that
  // cannot finish.
  while (!success_holds(loss, objective) && ledger.remaining() >= cfg.samples + 1) {
    const auto grad = nes_gradient_estimate(oracle, ledger, objective, x + outcome.eta, cfg, rng);
    if (!grad) break;
    outcome.eta.add_scaled(direction * static_cast<float>(cfg.step), *grad);
    if (cfg.per_step_clip) {
      const auto c = static_cast<float>(*cfg.per_step_clip);
      for (auto& v : outcome.eta.data()) v = std::clamp(v, -c, c);
    }
    const auto l = detail::probe_loss(oracle, ledger, objective, x + outcome.eta);
    if (!l) break;
    loss = *l;
    outcome.loss_trace.push_back({ledger.count(), loss});
  }

  outcome.queries_used = ledger.count() - start;
  outcome.final_loss = loss;
  outcome.success = success_holds(loss, objective);
  return outcome;
}

}  // namespace lup
