#include <cmath>

#include "lup/attacks.hpp"
#include "lup/kernels.hpp"

namespace lup {
namespace {

void normalize_l2(ImageTensor& t) {
  const double n = std::sqrt(kernels::sum_squares(t.data()));
  if (n > 0.0) t *= static_cast<float>(1.0 / n);
}

// Exponentiated-gradient step on a prior living in [-1, 1].
float eg_step(float value, double grad, double lr) {
  const double real = (static_cast<double>(value) + 1.0) / 2.0;
  const double pos = real * std::exp(lr * grad);
  const double neg = (1.0 - real) * std::exp(-lr * grad);
  return static_cast<float>(2.0 * pos / (pos + neg) - 1.0);
}

}  // namespace

void BanditsConfig::validate(Dims dims) const {
  if (!(prior_lr >= 0.0) || !(image_lr >= 0.0)) {
    throw ConfigError("Bandits learning rates must be nonnegative");
  }
  if (!(exploration > 0.0)) throw ConfigError("Bandits exploration must be positive");
  if (!(fd_eta > 0.0)) throw ConfigError("Bandits fd_eta must be positive");
  if (tile == 0 || dims.height % tile != 0 || dims.width % tile != 0) {
    throw ConfigError("Bandits tile " + std::to_string(tile) + " must divide image height and width " +
                      dims.to_string());
  }
}

ImageTensor upsample_tiles(const ImageTensor& prior, std::size_t tile) {
  const Dims& pd = prior.dims();
  ImageTensor out(Dims{pd.channels, pd.height * tile, pd.width * tile}, prior.range());
  for (std::size_t c = 0; c < pd.channels; ++c) {
    for (std::size_t h = 0; h < pd.height * tile; ++h) {
      for (std::size_t w = 0; w < pd.width * tile; ++w) {
        out.at(c, h, w) = prior.at(c, h / tile, w / tile);
      }
    }
  }
  return out;
}

AttackOutcome it_bandits_attack(const Oracle& oracle, QueryLedger& ledger,
                                const AttackObjective& objective, const ImageTensor& x,
                                const BanditsConfig& cfg, RngStream rng) {
  cfg.validate(x.dims());
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

  const Dims prior_dims{x.dims().channels, x.dims().height / cfg.tile, x.dims().width / cfg.tile};
  ImageTensor prior(prior_dims, x.range());
  // Gradient sign of the quantity being increased: -L when minimizing, +L when maximizing.
  const double ascent = objective.direction == Direction::minimize ? -1.0 : 1.0;
  const double noise_scale = cfg.exploration / std::sqrt(static_cast<double>(prior_dims.size()));

  while (!success_holds(loss, objective) && ledger.remaining() >= 3) {
    ImageTensor noise = sample_gaussian(prior_dims, rng, x.range());
    noise *= static_cast<float>(noise_scale);

    ImageTensor q1 = upsample_tiles(prior + noise, cfg.tile);
    ImageTensor q2 = upsample_tiles(prior - noise, cfg.tile);
    normalize_l2(q1);
    normalize_l2(q2);

    const ImageTensor current = x + outcome.eta;
    ImageTensor probe1 = current;
    probe1.add_scaled(static_cast<float>(cfg.fd_eta), q1);
    ImageTensor probe2 = current;
    probe2.add_scaled(static_cast<float>(cfg.fd_eta), q2);
    const auto l1 = detail::probe_loss(oracle, ledger, objective, probe1);
    const auto l2 = detail::probe_loss(oracle, ledger, objective, probe2);
    if (!l1 || !l2) break;

    const double deriv = ascent * (*l1 - *l2) / (cfg.fd_eta * cfg.exploration);
    for (std::size_t i = 0; i < prior.size(); ++i) {
      const double g = deriv * noise[i];
      if (cfg.prior_update == BanditsPriorUpdate::gradient) {
        prior[i] += static_cast<float>(cfg.prior_lr * g);
      } else {
        prior[i] = eg_step(prior[i], g, cfg.prior_lr);
      }
    }

    ImageTensor step = upsample_tiles(prior, cfg.tile);
    if (cfg.image_step == BanditsImageStep::sign) {
      for (auto& v : step.data()) v = static_cast<float>((v > 0.0f) - (v < 0.0f));
    } else {
      normalize_l2(step);
    }
    outcome.eta.add_scaled(static_cast<float>(cfg.image_lr), step);

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
