#include "termspace/embed.hpp"

#include <cmath>
#include <sstream>

#include "termspace/parallel.hpp"
#include "termspace/random.hpp"

namespace termspace {

namespace {

std::string describe(const Vector& u) {
  std::ostringstream os;
  os.precision(17);
  os << "[";
  for (Index i = 0; i < u.size(); ++i) os << (i ? ", " : "") << u(i);
  os << "]";
  return os.str();
}

}  // namespace

TerminalEmbedder::TerminalEmbedder(GroundSet ground, ProjectionMatrix pi, EpsilonBudget budget,
                                   Variant variant, std::optional<CoverSet> cover,
                                   SolverConfig solver, double tube_fraction)
    : searcher_(std::move(ground), tube_fraction),
      pi_(std::move(pi)),
      budget_(budget),
      variant_(variant),
      cover_(std::move(cover)),
      solver_(solver) {
  solver_.validate();
  const GroundSet& g = searcher_.ground();
  if (pi_.cols() != g.dim())
    throw InvalidArgument("TerminalEmbedder: projection has " + std::to_string(pi_.cols()) +
                          " columns, ground set dimension is " + std::to_string(g.dim()));
  const EpsilonBudget expected = make_budget(budget_.epsilon, variant_);
  if (expected.hull_distortion_target != budget_.hull_distortion_target ||
      expected.constraint_slack != budget_.constraint_slack ||
      expected.cover_radius != budget_.cover_radius)
    throw InvalidArgument("TerminalEmbedder: budget does not match variant");
  if (!(pi_.distortion_estimate >= 0.0 && pi_.distortion_estimate <= budget_.hull_distortion_target))
    throw InvalidArgument("TerminalEmbedder: projection is not certified to the hull distortion target");

  if (variant_ == Variant::finite) {
    if (!g.is_finite()) throw InvalidArgument("TerminalEmbedder: finite variant needs a finite ground set");
  } else {
    if (!cover_) throw InvalidArgument("TerminalEmbedder: cover variant needs a cover");
    if (cover_->radius != budget_.cover_radius)
      throw InvalidArgument("TerminalEmbedder: cover radius does not match the budget");
    if (cover_->centers.rows() != g.dim() || cover_->size() == 0)
      throw InvalidArgument("TerminalEmbedder: cover dimension mismatch");
  }

  if (g.is_finite()) {
    const PointSet& x = g.points();
    ground_images_.resize(pi_.rows(), x.size());
    for (Index i = 0; i < x.size(); ++i) ground_images_.col(i) = project(Vector(x.point(i)));
  }
  if (cover_) {
    cover_images_.resize(pi_.rows(), cover_->size());
    for (Index i = 0; i < cover_->size(); ++i) cover_images_.col(i) = project(Vector(cover_->centers.col(i)));
  }
}

Vector TerminalEmbedder::project(const Vector& x) const {
  Vector out = pi_.entries * x;
  return out;
}

ConstraintSystem<double> assemble_finite(const TerminalEmbedder& e, const Vector& u, const NearestResult& nn) {
  if (e.variant() != Variant::finite) throw InvalidArgument("assemble_finite: embedder is not finite");
  const PointSet& x = e.ground().points();
  const Index n = x.size();
  const Index k = *nn.index;
  const Vector r = u - nn.point;
  const double slack = e.budget().constraint_slack * nn.distance;

  ConstraintSystem<double> sys(e.target_dim(), RowProvenance::finite);
  sys.reserve(2 * n);
  std::vector<double> inner(static_cast<std::size_t>(n)), bound(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const Vector diff = x.point(i) - nn.point;
    inner[static_cast<std::size_t>(i)] = r.dot(diff);
    bound[static_cast<std::size_t>(i)] = slack * diff.norm();
  }
  for (Index i = 0; i < n; ++i)
    sys.add_row(e.ground_image(i) - e.ground_image(k),
                inner[static_cast<std::size_t>(i)] + bound[static_cast<std::size_t>(i)], i);
  for (Index i = 0; i < n; ++i)
    sys.add_row(e.ground_image(k) - e.ground_image(i),
                bound[static_cast<std::size_t>(i)] - inner[static_cast<std::size_t>(i)], i);
  return sys;
}

ConstraintSystem<double> assemble_cover(const TerminalEmbedder& e, const Vector& u, const NearestResult& nn) {
  if (e.variant() != Variant::cover) throw InvalidArgument("assemble_cover: embedder is not cover");
  const CoverSet& c = *e.cover();
  const Index l = c.size();
  const Vector r = u - nn.point;
  const double slack = e.budget().constraint_slack * nn.distance;
  const Vector inner = c.centers.transpose() * r;

  ConstraintSystem<double> sys(e.target_dim(), RowProvenance::cover);
  sys.reserve(2 * l);
  for (Index i = 0; i < l; ++i) sys.add_row(e.cover_image(i), inner(i) + slack, i);
  for (Index i = 0; i < l; ++i) sys.add_row(-e.cover_image(i), slack - inner(i), i);
  return sys;
}

Evaluation TerminalEmbedder::evaluate_detailed(const Vector& u) const {
  if (u.size() != input_dim())
    throw InvalidArgument("evaluate: query has dimension " + std::to_string(u.size()) + ", expected " +
                          std::to_string(input_dim()));
  Evaluation ev;
  ev.nearest = nearest(u);
  const Index m = target_dim();
  ev.value.setZero(m + 1);
  if (ev.nearest.distance == 0.0) {
    ev.value.head(m) = project(u);
    ev.u_prime = Vector::Zero(m);
    return ev;
  }

  const ConstraintSystem<double> sys =
      variant_ == Variant::finite ? assemble_finite(*this, u, ev.nearest) : assemble_cover(*this, u, ev.nearest);
  ev.constraint_rows = sys.rows();
  try {
    const MinNormSolution<double> sol = min_norm_point(sys, solver_);
    ev.u_prime = sol.z;
    ev.solver_iterations = sol.iterations;
  } catch (const std::exception& err) {
    throw EvaluationFailure(std::string(err.what()) + " at query " + describe(u), 0);
  }

  const double dist = ev.nearest.distance;
  const double radicand = dist * dist - ev.u_prime.squaredNorm();
  if (radicand < -solver_.radicand_clamp)
    throw EvaluationFailure("evaluate: |u'| exceeds |u - u_NN| (radicand " + std::to_string(radicand) +
                                ") at query " + describe(u),
                            0);
  const Vector base = ev.nearest.index ? Vector(ground_images_.col(*ev.nearest.index)) : project(ev.nearest.point);
  ev.value.head(m) = base + ev.u_prime;
  ev.value(m) = std::sqrt(std::max(0.0, radicand));
  return ev;
}

std::vector<Evaluation> evaluate_batch_detailed(const TerminalEmbedder& e, const Matrix& queries) {
  if (queries.rows() != e.input_dim())
    throw InvalidArgument("evaluate_batch: queries have dimension " + std::to_string(queries.rows()) +
                          ", expected " + std::to_string(e.input_dim()));
  std::vector<Evaluation> out(static_cast<std::size_t>(queries.cols()));
  parallel_for(out.size(), [&](std::size_t j) {
    try {
      out[j] = e.evaluate_detailed(queries.col(static_cast<Index>(j)));
    } catch (const std::exception& err) {
      throw EvaluationFailure("query " + std::to_string(j) + ": " + err.what(), j);
    }
  });
  return out;
}

Matrix evaluate_batch(const TerminalEmbedder& e, const Matrix& queries) {
  const auto evals = evaluate_batch_detailed(e, queries);
  Matrix out(e.output_dim(), queries.cols());
  for (std::size_t j = 0; j < evals.size(); ++j) out.col(static_cast<Index>(j)) = evals[j].value;
  return out;
}

TerminalEmbedder build_embedder(GroundSet ground, const BuildOptions& opts) {
  const EpsilonBudget budget = make_budget(opts.epsilon, opts.variant);
  if (opts.variant == Variant::finite && !ground.is_finite())
    throw InvalidArgument("build_embedder: finite variant needs a finite ground set");
  const SecantSet secants = ground.is_finite()
                                ? unit_secants(ground.points())
                                : sampled_secants(ground, opts.secant_samples, mix_seed(opts.seed, 1));
  std::optional<CoverSet> cover;
  if (opts.variant == Variant::cover) cover = greedy_cover(secants, budget.cover_radius);
  HullProbeOptions probe = opts.probe;
  probe.seed = mix_seed(opts.seed, 2);
  ProjectionMatrix pi = certify_or_grow(gaussian_factory(ground.dim(), mix_seed(opts.seed, 3)), secants,
                                        budget.hull_distortion_target, opts.m0, opts.m_cap, probe);
  return TerminalEmbedder(std::move(ground), std::move(pi), budget, opts.variant, std::move(cover), opts.solver);
}

}  // namespace termspace
