#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "termspace/cli.hpp"
#include "termspace/random.hpp"
#include "termspace/verify.hpp"

namespace termspace::cli {

namespace {

using nlohmann::json;

struct ShapeArgs {
  std::string shape;
  double radius = 1.0;
  int dim = 2;
  bool random_plane = false;
};

void add_shape_options(CLI::App* cmd, ShapeArgs& a) {
  cmd->add_option("--shape", a.shape, "Analytic ground set instead of a points file")
      ->check(CLI::IsMember({"circle", "sphere"}));
  cmd->add_option("--radius", a.radius, "Shape radius")->check(CLI::PositiveNumber);
  cmd->add_option("--dim", a.dim, "Ambient dimension of the shape")->check(CLI::Range(2, 1 << 20));
  cmd->add_flag("--random-plane", a.random_plane, "Place the circle in a random 2-plane drawn from --seed");
}

GroundSet make_ground(const std::string& points_file, const ShapeArgs& a, std::uint64_t seed, double reach) {
  if (!points_file.empty() && !a.shape.empty()) throw CLI::ValidationError("give either a points file or --shape");
  if (!points_file.empty()) return GroundSet::finite(PointSet(read_points_file(points_file)), reach);
  if (a.shape.empty()) throw CLI::ValidationError("a points file or --shape is required");
  const Index d = a.dim;
  if (a.shape == "sphere") return GroundSet::sphere(Vector::Zero(d), a.radius);
  Matrix basis = Matrix::Identity(d, 2);
  if (a.random_plane) basis = orthonormal_matrix(d, 2, mix_seed(seed, 7)).entries;
  return GroundSet::circle(Vector::Zero(d), a.radius, basis);
}

Vector parse_vector(const std::string& text, Index d) {
  std::istringstream in(text);
  const Matrix m = read_points_csv(in, "--u");
  if (m.cols() != 1 || m.rows() != d)
    throw CLI::ValidationError("--u must list " + std::to_string(d) + " comma-separated values");
  return m.col(0);
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-")
    out << text;
  else
    write_file_atomic(path, text);
}

std::string report_text(const json& j) {
  std::ostringstream os;
  for (const auto& [key, value] : j.items()) {
    if (value.is_array() || value.is_object()) continue;
    os << key << ": " << (value.is_string() ? value.get<std::string>() : value.dump()) << "\n";
  }
  os << "json: " << j.dump() << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------

struct BuildArgs {
  std::string points, out;
  ShapeArgs shape;
  double epsilon = 0.0;
  std::string variant = "finite";
  double reach = kInfinity;
  std::int64_t m0 = 8, m_cap = 4096;
  std::uint64_t seed = 0;
  int secant_samples = 2048;
  int probes = 0;
};

int cmd_build(const BuildArgs& a, std::ostream& out, std::ostream& err) {
  BuildOptions opts;
  opts.epsilon = a.epsilon;
  opts.variant = parse_variant(a.variant);
  opts.seed = a.seed;
  opts.m0 = a.m0;
  opts.m_cap = a.m_cap;
  opts.secant_samples = a.secant_samples;
  opts.probe.probes = a.probes;
  if (opts.variant == Variant::cover && !a.points.empty() && std::isinf(a.reach))
    err << "warning: cover variant without --reach; tube checks treat the reach as infinite\n";
  GroundSet ground = make_ground(a.points, a.shape, a.seed, a.reach);
  const TerminalEmbedder e = build_embedder(std::move(ground), opts);
  save_archive(a.out, e, a.seed);
  out << "m: " << e.target_dim() << "\n"
      << "distortion_estimate: " << format_double(e.projection().distortion_estimate) << "\n"
      << "hull_target: " << format_double(e.budget().hull_distortion_target) << "\n";
  if (e.cover()) out << "cover_size: " << e.cover()->size() << "\n";
  return kOk;
}

struct EvalArgs {
  std::string archive, queries, out;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const Archive ar = load_archive(a.archive);
  const Matrix q = read_points_file(a.queries);
  if (q.rows() != ar.embedder.input_dim())
    throw InvalidArgument(a.queries + ": row 1 has dimension " + std::to_string(q.rows()) + ", expected " +
                          std::to_string(ar.embedder.input_dim()));
  const auto evals = evaluate_batch_detailed(ar.embedder, q);
  Matrix values(ar.embedder.output_dim(), q.cols());
  std::vector<int> ties(evals.size());
  for (std::size_t j = 0; j < evals.size(); ++j) {
    values.col(static_cast<Index>(j)) = evals[j].value;
    ties[j] = evals[j].nearest.tie ? 1 : 0;
  }
  std::ostringstream os;
  write_csv(os, values, ties);
  emit(a.out, os.str(), out);
  return kOk;
}

struct AuditArgs {
  std::string archive, mode = "terminal", u, queries, report;
  long pairs = 10000;
  std::uint64_t seed = 0;
  double exponent = 0.0;
  int probe_points = 1000;
};

int cmd_audit(const AuditArgs& a, std::ostream& out) {
  const Archive ar = load_archive(a.archive);
  const TerminalEmbedder& e = ar.embedder;
  json j;
  j["mode"] = a.mode;
  j["epsilon"] = e.budget().epsilon;
  j["variant"] = to_string(e.variant());
  j["m"] = e.target_dim();
  j["seed"] = a.seed;
  bool pass = false;
  if (a.mode == "terminal") {
    const AuditReport r = audit_terminal(e, a.pairs, a.seed);
    pass = r.pass;
    j["pairs_tested"] = r.pairs_tested;
    j["min_ratio"] = r.min_ratio;
    j["max_ratio"] = r.max_ratio;
    j["violation_count"] = r.violation_count;
    j["excluded_ties"] = r.excluded_ties;
    j["skipped"] = r.skipped;
    json v = json::array();
    for (const PairViolation& p : r.violations)
      v.push_back({{"x", std::vector<double>(p.x.data(), p.x.data() + p.x.size())},
                   {"y", std::vector<double>(p.y.data(), p.y.data() + p.y.size())},
                   {"ratio", p.ratio}});
    j["violations"] = v;
  } else if (a.mode == "holder") {
    if (a.u.empty()) throw CLI::ValidationError("--mode holder requires --u");
    const Vector u = parse_vector(a.u, e.input_dim());
    const double exponent = a.exponent > 0.0 ? a.exponent : (e.variant() == Variant::cover ? 0.25 : 0.5);
    const HolderAudit h = audit_holder(e, u, a.pairs, exponent, a.seed);
    pass = h.pass;
    j["exponent"] = exponent;
    j["pairs_used"] = h.pairs_used;
    j["radius"] = h.radius;
    j["max_ratio"] = h.max_ratio;
    j["fitted_slope"] = h.fitted_slope;
    j["bound"] = std::isinf(h.bound) ? json("inf") : json(h.bound);
    j["C_u"] = h.constants.C_u;
  } else if (a.mode == "constraints") {
    const Matrix q = a.queries.empty() ? sample_queries(e.ground(), a.pairs, a.seed) : read_points_file(a.queries);
    if (q.rows() != e.input_dim()) throw InvalidArgument(a.queries + ": dimension mismatch");
    const ConstraintAudit c = audit_constraint_norms(e, q, a.probe_points, mix_seed(a.seed, 1));
    pass = c.pass;
    j["queries"] = c.queries;
    j["probes"] = c.probes;
    j["max_norm_violation"] = c.max_norm_violation;
    j["max_angle_violation"] = c.max_angle_violation;
    j["max_cover_violation"] = c.max_cover_violation;
    j["tolerance"] = c.tolerance;
  } else {
    throw CLI::ValidationError("--mode must be terminal, holder or constraints");
  }
  j["pass"] = pass;
  emit(a.report, report_text(j), out);
  return pass ? kOk : kAuditFailed;
}

struct WidthArgs {
  std::string points;
  ShapeArgs shape;
  int trials = 100000;
  int secant_samples = 2048;
  std::uint64_t seed = 0;
};

int cmd_width(const WidthArgs& a, std::ostream& out) {
  const GroundSet g = make_ground(a.points, a.shape, a.seed, kInfinity);
  const SecantSet s =
      g.is_finite() ? unit_secants(g.points()) : sampled_secants(g, a.secant_samples, mix_seed(a.seed, 1));
  const WidthEstimate w = gaussian_width_mc(s, a.trials, mix_seed(a.seed, 2));
  out << "width: " << format_double(w.mean) << " +/- " << format_double(w.stderr_) << "\n";
  return kOk;
}

struct BoundArgs {
  int dim = 1;
  double tau = 0.0, vol = 0.0, bvol = 0.0;
};

int cmd_manifold_bound(const BoundArgs& a, std::ostream& out) {
  const ManifoldWidthBound b = manifold_width_bound(a.dim, a.tau, a.vol, a.bvol);
  out << "alpha: " << format_double(b.alpha) << "\n"
      << "beta: " << format_double(b.beta) << "\n"
      << "bound: " << format_double(b.bound) << "\n";
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Terminal embeddings: build, evaluate and audit", "termspace"};
  app.require_subcommand(1);

  BuildArgs build;
  auto* b = app.add_subcommand("build", "Certify a projection and write an embedder archive");
  b->add_option("points", build.points, "Headerless CSV, one point per row");
  add_shape_options(b, build.shape);
  b->add_option("--epsilon", build.epsilon, "Target distortion in (0,1)")->required()->check(CLI::Range(0.0, 1.0));
  b->add_option("--variant", build.variant, "finite or cover")->check(CLI::IsMember({"finite", "cover"}));
  b->add_option("--reach", build.reach, "Reach of a finite ground set")->check(CLI::PositiveNumber);
  b->add_option("--m0", build.m0, "Initial target dimension")->check(CLI::PositiveNumber);
  b->add_option("--m-cap", build.m_cap, "Largest target dimension tried")->check(CLI::PositiveNumber);
  b->add_option("--seed", build.seed, "Random seed");
  b->add_option("--secant-samples", build.secant_samples, "Sampled secant pairs for shapes")->check(CLI::Range(2, 1 << 24));
  b->add_option("--probes", build.probes, "Hull probes (0 = |S| + 512)")->check(CLI::NonNegativeNumber);
  b->add_option("--out", build.out, "Archive path")->required();

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "Evaluate f at each query row");
  e->add_option("archive", eval.archive)->required();
  e->add_option("queries", eval.queries)->required();
  e->add_option("--out", eval.out, "Output CSV (default stdout)");

  AuditArgs audit;
  auto* au = app.add_subcommand("audit", "Audit an embedder; exit 1 on failure");
  au->add_option("archive", audit.archive)->required();
  au->add_option("--mode", audit.mode)->check(CLI::IsMember({"terminal", "holder", "constraints"}));
  au->add_option("--pairs", audit.pairs, "Pairs (or queries for constraints)")->check(CLI::Range(1L, 1L << 40));
  au->add_option("--seed", audit.seed);
  au->add_option("--u", audit.u, "Center for holder mode, comma-separated");
  au->add_option("--exponent", audit.exponent, "Holder exponent, 0.25 or 0.5");
  au->add_option("--queries", audit.queries, "Query CSV for constraints mode");
  au->add_option("--probe-points", audit.probe_points, "Shape samples replayed in constraints mode")
      ->check(CLI::PositiveNumber);
  au->add_option("--report", audit.report, "Report path (default stdout)");

  WidthArgs width;
  auto* w = app.add_subcommand("width", "Monte Carlo Gaussian width of the unit secants");
  w->add_option("points", width.points);
  add_shape_options(w, width.shape);
  w->add_option("--trials", width.trials)->check(CLI::Range(2, 1 << 30));
  w->add_option("--secant-samples", width.secant_samples)->check(CLI::Range(2, 1 << 24));
  w->add_option("--seed", width.seed);

  BoundArgs bound;
  auto* mb = app.add_subcommand("manifold-bound", "Gaussian width bound for a manifold");
  mb->add_option("--dim", bound.dim)->required()->check(CLI::PositiveNumber);
  mb->add_option("--tau", bound.tau)->required();
  mb->add_option("--vol", bound.vol)->required();
  mb->add_option("--bvol", bound.bvol)->required();

  try {
    app.parse(argc, argv);
    if (*b) {
      if (!(build.epsilon > 0.0 && build.epsilon < 1.0)) throw CLI::ValidationError("--epsilon must lie in (0,1)");
      return cmd_build(build, out, err);
    }
    if (*e) return cmd_eval(eval, out);
    if (*au) return cmd_audit(audit, out);
    if (*w) return cmd_width(width, out);
    if (!(bound.tau > 0.0)) throw CLI::ValidationError("--tau must be > 0");
    return cmd_manifold_bound(bound, out);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& ex) {
    err << "error: " << ex.what() << "\n";
    return kUsage;
  } catch (const CertificationFailure& ex) {
    err << "certification failed: " << ex.what() << "\n";
    return kSolverFailure;
  } catch (const EvaluationFailure& ex) {
    err << "evaluation failed: " << ex.what() << "\n";
    return kSolverFailure;
  } catch (const ConvergenceFailure& ex) {
    err << "solver failed: " << ex.what() << "\n";
    return kSolverFailure;
  } catch (const InfeasibleSystem& ex) {
    err << "solver failed: " << ex.what() << "\n";
    return kSolverFailure;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kUsage;
  }
}

}  // namespace termspace::cli
