#pragma once

#include <string>
#include <string_view>

#include "lup/tensor.hpp"

namespace lup {

enum class LossKind { mse, mae };
enum class Direction { minimize, maximize };
enum class NormKind { l2, linf };

/// Loss L, target image r, whether L is driven down or up, success threshold tau and the
/// norm used to report perturbation size.
struct AttackObjective {
  LossKind loss = LossKind::mse;
  ImageTensor target;
  Direction direction = Direction::minimize;
  double threshold = 0.0;
  NormKind report_norm = NormKind::l2;

  /// L(output, target).
  double loss_of(const ImageTensor& output) const;
  void validate() const;
};

/// Mean squared or mean absolute elementwise difference.
double regression_loss(const ImageTensor& a, const ImageTensor& b, LossKind kind);

double perturbation_norm(const ImageTensor& eta, NormKind p);

/// minimize: loss <= tau; maximize: loss >= tau. Both boundaries are inclusive.
bool success_holds(double loss, const AttackObjective& objective);

/// Whether `candidate` is strictly better than `current` in the objective's direction.
bool improves(double candidate, double current, Direction direction);

std::string_view to_string(LossKind k);
std::string_view to_string(Direction d);
std::string_view to_string(NormKind n);
LossKind parse_loss_kind(std::string_view s);
NormKind parse_norm_kind(std::string_view s);

}  // namespace lup
