#pragma once

// Leaking Universal Perturbations: harvest perturbations from ordinary IT-SimBA attacks
// on a small dataset, extract their principal components, then attack new images with
// those components first and the pixel basis once the loss saturates.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lup/attacks.hpp"

namespace lup {

struct PrincipalComponents {
  std::vector<ImageTensor> components;     // unit norm, pairwise orthogonal
  std::vector<double> explained_variance;  // nonincreasing, one per component
};

/// PCA of mean-centred, flattened perturbations.
///
/// Components are ordered by explained variance; those below 1e-12 of the largest are
/// dropped. Each component's largest-magnitude coordinate is made positive.
PrincipalComponents extract_components(std::span<const ImageTensor> perturbations);

/// Builds the objective for one image; may spend queries from `ledger`.
using ObjectiveFactory =
    std::function<AttackObjective(const ImageTensor& x, const Oracle& oracle, QueryLedger& ledger)>;

struct LeakReport {
  std::vector<ImageTensor> perturbations;
  std::vector<AttackOutcome> per_image_outcomes;
  std::vector<std::uint64_t> objective_queries;  // per image, spent building the objective
  std::uint64_t total_leak_queries = 0;          // every query issued, objectives included
  PrincipalComponents basis;
};

/// Runs IT-SimBA on every leak image with its own ledger of `budget_per_image` and a
/// pixel-basis stream cfg.rng.substream(i), then extracts components from all resulting
/// perturbations, successful or not. Images are attacked in parallel.
LeakReport leak_phase(const Oracle& oracle, std::span<const ImageTensor> leak_dataset,
                      const ObjectiveFactory& objective_factory, const SimbaConfig& simba_cfg,
                      std::uint64_t budget_per_image, int threads = 0);

struct ExploitConfig {
  double step = 0.4;        // xi
  std::size_t n_sat = 20;   // failed probes tolerated before switching to the pixel basis
  RngStream fallback_basis_rng{};

  void validate() const;
};

/// Exploitation phase: components in stored order, then the shuffled pixel basis after
/// n_sat consecutive failed probes or when the components run out.
AttackOutcome exploit_phase(const Oracle& oracle, QueryLedger& ledger,
                            const AttackObjective& objective, const ImageTensor& x,
                            std::span<const ImageTensor> components, const ExploitConfig& cfg);

/// Same loop over caller-supplied candidate streams.
AttackOutcome exploit_phase(const Oracle& oracle, QueryLedger& ledger,
                            const AttackObjective& objective, const ImageTensor& x,
                            CandidateSource& leaked, CandidateSource& fallback, double step,
                            std::size_t n_sat);

/// leak_queries + dataset_size * mean_exploit_queries.
double project_total_queries(std::uint64_t leak_queries, double mean_exploit_queries,
                             std::uint64_t dataset_size);

// ---------------------------------------------------------------------------------------
// Component bundle on disk: manifest.json plus component_0000.btf ... component_{k-1}.btf.

struct BundleManifest {
  Dims dims{};
  std::vector<double> explained_variance;
  std::uint64_t leak_queries = 0;
  std::string source_attack = "it-simba";
  std::uint64_t seed = 0;
};

struct ComponentBundle {
  BundleManifest manifest;
  std::vector<ImageTensor> components;
};

void save_bundle(const std::filesystem::path& dir, const PrincipalComponents& pcs,
                 const BundleManifest& manifest);
ComponentBundle load_bundle(const std::filesystem::path& dir, ValueRange range = {});

namespace detail {

struct SymmetricEigen {
  std::vector<double> values;   // descending
  std::vector<double> vectors;  // column j (row-major n x n) belongs to values[j]
};

/// Cyclic Jacobi eigendecomposition of a dense symmetric row-major n x n matrix.
SymmetricEigen jacobi_eigen(std::vector<double> matrix, std::size_t n);

}  // namespace detail
}  // namespace lup
