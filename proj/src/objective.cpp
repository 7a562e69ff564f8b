#include "lup/objective.hpp"

#include <cmath>

#include "lup/kernels.hpp"

namespace lup {

double regression_loss(const ImageTensor& a, const ImageTensor& b, LossKind kind) {
  require_same_dims(a, b, "regression_loss");
  const auto n = static_cast<double>(a.size());
  switch (kind) {
    case LossKind::mse:
      return kernels::sum_squared_diff(a.data(), b.data()) / n;
    case LossKind::mae:
      return kernels::sum_abs_diff(a.data(), b.data()) / n;
  }
  return 0.0;
}

double perturbation_norm(const ImageTensor& eta, NormKind p) {
  switch (p) {
    case NormKind::l2:
      return std::sqrt(kernels::sum_squares(eta.data()));
    case NormKind::linf:
      return kernels::max_abs(eta.data());
  }
  return 0.0;
}

bool success_holds(double loss, const AttackObjective& objective) {
  return objective.direction == Direction::minimize ? loss <= objective.threshold
                                                    : loss >= objective.threshold;
}

bool improves(double candidate, double current, Direction direction) {
  return direction == Direction::minimize ? candidate < current : candidate > current;
}

double AttackObjective::loss_of(const ImageTensor& output) const {
  return regression_loss(output, target, loss);
}

void AttackObjective::validate() const {
  if (!(threshold >= 0.0) || !std::isfinite(threshold)) {
    throw ConfigError("success threshold must be a finite nonnegative number");
  }
  if (target.empty()) throw ConfigError("objective has no target image");
}

std::string_view to_string(LossKind k) { return k == LossKind::mse ? "mse" : "mae"; }
std::string_view to_string(Direction d) {
  return d == Direction::minimize ? "minimize" : "maximize";
}
std::string_view to_string(NormKind n) { return n == NormKind::l2 ? "l2" : "linf"; }

LossKind parse_loss_kind(std::string_view s) {
  if (s == "mse") return LossKind::mse;
  if (s == "mae") return LossKind::mae;
  throw ConfigError("unknown loss kind '" + std::string(s) + "'");
}

NormKind parse_norm_kind(std::string_view s) {
  if (s == "l2") return NormKind::l2;
  if (s == "linf") return NormKind::linf;
  throw ConfigError("unknown norm '" + std::string(s) + "'");
}

}  // namespace lup
