#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "termspace/core.hpp"
#include "termspace/geometry.hpp"
#include "termspace/minnorm.hpp"
#include "termspace/randproj.hpp"

namespace termspace {

/// Solver failure annotated with the query that produced it.
struct EvaluationFailure : std::runtime_error {
  EvaluationFailure(const std::string& what, std::size_t query_index)
      : std::runtime_error(what), query_index(query_index) {}
  std::size_t query_index;
};

/// Everything computed while evaluating f at one query.
struct Evaluation {
  Vector value;    // f(u), length m + 1
  Vector u_prime;  // min-norm point of the per-query polyhedron
  NearestResult nearest;
  Index constraint_rows = 0;
  int solver_iterations = 0;
};

/// Terminal embedding f(u) = (Π u_NN + u', sqrt(|u - u_NN|^2 - |u'|^2)) where u'
/// is the minimum-norm point satisfying the angle constraints, either one
/// pair per ground point (finite) or one pair per cover direction (cover).
/// Immutable after construction.
class TerminalEmbedder {
 public:
  TerminalEmbedder(GroundSet ground, ProjectionMatrix pi, EpsilonBudget budget, Variant variant,
                   std::optional<CoverSet> cover = std::nullopt, SolverConfig solver = {},
                   double tube_fraction = kDefaultTubeFraction);

  const GroundSet& ground() const { return searcher_.ground(); }
  const ProjectionMatrix& projection() const { return pi_; }
  const EpsilonBudget& budget() const { return budget_; }
  Variant variant() const { return variant_; }
  const std::optional<CoverSet>& cover() const { return cover_; }
  const SolverConfig& solver() const { return solver_; }

  Index input_dim() const { return pi_.cols(); }
  Index target_dim() const { return pi_.rows(); }
  Index output_dim() const { return pi_.rows() + 1; }

  NearestResult nearest(const Vector& u) const { return searcher_.query(u); }
  /// Π x through the same product used for the precomputed ground images.
  Vector project(const Vector& x) const;

  /// Π x_i for ground point i (finite ground sets).
  auto ground_image(Index i) const { return ground_images_.col(i); }
  /// Π w_i for cover direction i.
  auto cover_image(Index i) const { return cover_images_.col(i); }

  Evaluation evaluate_detailed(const Vector& u) const;
  Vector evaluate(const Vector& u) const { return evaluate_detailed(u).value; }

 private:
  NearestSearcher searcher_;
  ProjectionMatrix pi_;
  EpsilonBudget budget_;
  Variant variant_;
  std::optional<CoverSet> cover_;
  SolverConfig solver_;
  Matrix ground_images_;  // m x n
  Matrix cover_images_;   // m x l
};

/// Rows for |<z, Π(x_i - u_NN)> - <u - u_NN, x_i - u_NN>| <= (eps/10)|u - u_NN||x_i - u_NN|,
/// upper inequalities first (rows 0..), then the mirrored lower ones.
/// Ground points equal to u_NN produce zero rows and are dropped.
ConstraintSystem<double> assemble_finite(const TerminalEmbedder& e, const Vector& u, const NearestResult& nn);

/// Rows for |<z, Π w_i> - <u - u_NN, w_i>| <= (eps/30)|u - u_NN| over the cover.
ConstraintSystem<double> assemble_cover(const TerminalEmbedder& e, const Vector& u, const NearestResult& nn);

/// Evaluates every query (columns of `queries`) in parallel; output column j
/// equals evaluate(queries.col(j)) regardless of worker count. The failure
/// with the lowest query index is rethrown as EvaluationFailure.
Matrix evaluate_batch(const TerminalEmbedder& e, const Matrix& queries);
std::vector<Evaluation> evaluate_batch_detailed(const TerminalEmbedder& e, const Matrix& queries);

struct BuildOptions {
  double epsilon = 0.5;
  Variant variant = Variant::finite;
  std::uint64_t seed = 0;
  Index m0 = 8;
  Index m_cap = 4096;
  int secant_samples = 2048;  // analytic ground sets only
  HullProbeOptions probe;     // seed is overridden by `seed`
  SolverConfig solver;
};

/// Secants -> cover (cover variant) -> certify_or_grow to the variant's hull
/// target -> embedder. Throws CertificationFailure when m_cap is exhausted.
TerminalEmbedder build_embedder(GroundSet ground, const BuildOptions& opts);

}  // namespace termspace
