#include "icevp/solver.hpp"

#include <Eigen/SparseLU>
#include <unsupported/Eigen/IterativeSolvers>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace icevp {

std::string to_string(LinearMethod method) {
  return method == LinearMethod::SparseDirect ? "sparse_direct" : "krylov";
}

LinearMethod linear_method_from_string(const std::string& name) {
  if (name == "sparse_direct") return LinearMethod::SparseDirect;
  if (name == "krylov") return LinearMethod::Krylov;
  throw ConfigError("unknown linear method \"" + name +
                    "\" (expected sparse_direct or krylov)");
}

std::string to_string(MassModel mass) {
  return mass == MassModel::Lumped ? "lumped" : "consistent";
}

MassModel mass_model_from_string(const std::string& name) {
  if (name == "lumped") return MassModel::Lumped;
  if (name == "consistent") return MassModel::Consistent;
  throw ConfigError("unknown mass model \"" + name +
                    "\" (expected lumped or consistent)");
}

void SolverConfig::validate() const {
  if (!(dt > 0.0)) throw ConfigError("solver: dt must be > 0");
  if (!(t_end > 0.0)) throw ConfigError("solver: t_end must be > 0");
  const double steps = t_end / dt;
  if (std::abs(steps - std::round(steps)) >
      1e-9 * std::max(1.0, std::abs(steps)))
    throw ConfigError("solver: t_end must be an integer multiple of dt");
  if (!(picard_tol > 0.0)) throw ConfigError("solver: picard_tol must be > 0");
  if (picard_max < 1) throw ConfigError("solver: picard_max must be >= 1");
  if (!(damping > 0.0 && damping <= 1.0))
    throw ConfigError("solver: damping must lie in (0, 1]");
  if (!(linear_rtol > 0.0))
    throw ConfigError("solver: linear_rtol must be > 0");
}

void Problem::validate() const {
  if (!mesh) throw ConfigError("problem: no mesh");
  rheology.validate();
  phys.validate();
  ocean.validate();
  strength.validate();
  if (u0.mesh() != mesh)
    throw ConfigError("problem: u0 does not live on the problem mesh");
  const int nv = mesh->n_vertices();
  const auto check_nodes = [nv](int nc, const char* what) {
    if (nc >= 0 && nc != nv)
      throw ConfigError(std::string("problem: ") + what +
                        " node count does not match the mesh");
  };
  check_nodes(ocean.U.node_count(), "ocean velocity");
  check_nodes(body.tau_atm.node_count(), "wind stress");
  check_nodes(body.grad_H.node_count(), "surface tilt");
  check_nodes(body.f_extra.node_count(), "extra body force");
  check_nodes(strength.P.node_count(), "ice strength");
}

std::vector<double> linear_solve(const SparseMatrix& A,
                                 const std::vector<double>& b,
                                 const SolverConfig& cfg, int* iterations) {
  if (!A.finalized()) throw ConfigError("linear solve: matrix not finalized");
  if (static_cast<int>(b.size()) != A.dim())
    throw ConfigError("linear solve: dimension mismatch");
  const int n = A.dim();
  if (iterations) *iterations = 0;
  if (n == 0) return {};

  const Eigen::Map<const Eigen::VectorXd> bv(b.data(), n);
  const double bnorm = bv.norm();
  if (bnorm == 0.0) return std::vector<double>(static_cast<std::size_t>(n), 0.0);

  Eigen::VectorXd x;
  if (cfg.linear_method == LinearMethod::SparseDirect) {
    Eigen::SparseMatrix<double> col_major = A.csr();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(col_major);
    if (lu.info() != Eigen::Success)
      throw SolveError("linear solve: factorization failed (singular matrix)");
    x = lu.solve(bv);
    if (lu.info() != Eigen::Success)
      throw SolveError("linear solve: back substitution failed");
    if (iterations) *iterations = 1;
  } else {
    Eigen::GMRES<Eigen::SparseMatrix<double, Eigen::RowMajor>,
                 Eigen::DiagonalPreconditioner<double>>
        gmres(A.csr());
    gmres.set_restart(60);
    gmres.setMaxIterations(10000);
    gmres.setTolerance(0.5 * cfg.linear_rtol);
    x = gmres.solve(bv);
    if (gmres.info() != Eigen::Success) {
      std::ostringstream os;
      os << "linear solve: GMRES stalled after " << gmres.iterations()
         << " iterations, best relative residual " << gmres.error();
      throw SolveError(os.str());
    }
    if (iterations) *iterations = static_cast<int>(gmres.iterations());
  }

  const double residual = (A.csr() * x - bv).norm();
  if (!(residual <= cfg.linear_rtol * bnorm)) {
    std::ostringstream os;
    os << "linear solve: residual " << residual << " above " << cfg.linear_rtol
       << " * |b| = " << cfg.linear_rtol * bnorm;
    throw SolveError(os.str());
  }
  return std::vector<double>(x.data(), x.data() + n);
}

DofVector implicit_euler_step(const Problem& pb, const DofVector& u_prev,
                              double t_next, const SolverConfig& cfg,
                              StepStats* stats) {
  DofVector u = u_prev;
  double damping = cfg.damping;
  double prev_inc = std::numeric_limits<double>::infinity();
  std::vector<double> history;
  int linear_total = 0;

  for (int it = 1; it <= cfg.picard_max; ++it) {
    const AssembledSystem sys = assemble_picard_system(
        *pb.mesh, u, u_prev, t_next, cfg.dt, pb.strength, pb.ocean, pb.body,
        pb.phys, pb.rheology, cfg.time_mass);
    int lin_iters = 0;
    const auto x = linear_solve(sys.matrix, sys.rhs, cfg, &lin_iters);
    linear_total += lin_iters;

    DofVector u_new(pb.mesh);
    for (int i = 0; i < u_new.size(); ++i)
      u_new[i] = (1.0 - damping) * u[i] + damping * x[static_cast<std::size_t>(i)];

    const double inc = v_seminorm(u_new - u);
    history.push_back(inc);
    const double scale = v_seminorm(u_new);
    if (stats) {
      stats->picard_iters = it;
      stats->linear_iters = linear_total;
      stats->increments = history;
    }
    if (inc <= cfg.picard_tol * scale || inc == 0.0) return u_new;
    // Safeguard: growing increments mean the fixed point is overshooting;
    // halve the damping (down to 1/64) and continue.
    if (inc > prev_inc && damping > 1.0 / 64.0) damping *= 0.5;
    prev_inc = inc;
    u = u_new;
  }

  std::ostringstream os;
  os << "Picard iteration did not converge within " << cfg.picard_max
     << " iterations at t = " << t_next << "; V-norm increments:";
  for (double h : history) os << " " << h;
  throw SolveError(os.str());
}

namespace {

long step_count(const SolverConfig& cfg) {
  return std::lround(cfg.t_end / cfg.dt);
}

LedgerRow make_ledger_row(const Problem& pb, const SolverConfig& cfg,
                          const DofVector& u_next, const DofVector& u_prev,
                          long step, double t, const StepStats& st) {
  const TriMesh& mesh = *pb.mesh;
  const OperatorParts parts = apply_operator_parts(
      mesh, u_next, t, pb.strength, pb.ocean, pb.phys, pb.rheology);
  const auto load = lumped_load_vector(
      mesh, body_load(t, pb.body, pb.phys, mesh.n_vertices()));
  LedgerRow row;
  row.step = step;
  row.t = t;
  const double h = h_norm_consistent(u_next);
  row.kinetic = 0.5 * pb.phys.m * h * h;
  row.a_dissipation = pairing(parts.a_part, u_next);
  row.coriolis_power = pairing(parts.c_part, u_next);
  row.drag_power = -pairing(parts.g_part, u_next);
  row.external_power = pairing(load, u_next);
  row.picard_iters = st.picard_iters;
  row.linear_iters = st.linear_iters;
  row.mass_rate = mass_rate_pairing(mesh, u_next, u_prev, pb.phys.m, cfg.dt,
                                    cfg.time_mass);
  row.energy_residual = row.mass_rate + row.a_dissipation +
                        row.coriolis_power - row.drag_power -
                        row.external_power;
  return row;
}

}  // namespace

SimulationResult run_simulation(const Problem& pb, const SolverConfig& cfg,
                                int snapshot_every) {
  pb.validate();
  cfg.validate();
  if (snapshot_every < 0)
    throw ConfigError("solver: snapshot_every must be >= 0");
  const long n_steps = step_count(cfg);

  SimulationResult result;
  DofVector u = pb.u0;
  result.snapshots.push_back(u);
  result.snapshot_steps.push_back(0);
  for (long k = 1; k <= n_steps; ++k) {
    const double t = static_cast<double>(k) * cfg.dt;
    StepStats st;
    DofVector u_next;
    try {
      u_next = implicit_euler_step(pb, u, t, cfg, &st);
    } catch (const SolveError& err) {
      result.completed = false;
      std::ostringstream os;
      os << "step " << k << " failed: " << err.what();
      result.error = os.str();
      return result;
    }
    result.ledger.rows.push_back(
        make_ledger_row(pb, cfg, u_next, u, k, t, st));
    u = u_next;
    if ((snapshot_every > 0 && k % snapshot_every == 0) || k == n_steps) {
      result.snapshots.push_back(u);
      result.snapshot_steps.push_back(k);
    }
  }
  return result;
}

DofVector steady_solve(const Problem& pb, double t, const SolverConfig& cfg) {
  pb.validate();
  if (!(cfg.picard_tol > 0.0) || cfg.picard_max < 1)
    throw ConfigError("steady solve: invalid Picard configuration");

  DofVector u = pb.u0;
  double damping = cfg.damping;
  double prev_inc = std::numeric_limits<double>::infinity();
  std::vector<double> history;
  for (int it = 1; it <= cfg.picard_max; ++it) {
    const AssembledSystem sys = assemble_steady_system(
        *pb.mesh, u, t, pb.strength, pb.ocean, pb.body, pb.phys, pb.rheology);
    const auto x = linear_solve(sys.matrix, sys.rhs, cfg);
    DofVector u_new(pb.mesh);
    for (int i = 0; i < u_new.size(); ++i)
      u_new[i] = (1.0 - damping) * u[i] + damping * x[static_cast<std::size_t>(i)];
    const double inc = v_seminorm(u_new - u);
    history.push_back(inc);
    if (inc <= cfg.picard_tol * v_seminorm(u_new) || inc == 0.0) return u_new;
    if (inc > prev_inc && damping > 1.0 / 64.0) damping *= 0.5;
    prev_inc = inc;
    u = u_new;
  }
  std::ostringstream os;
  os << "steady solve: Picard iteration did not converge within "
     << cfg.picard_max << " iterations; V-norm increments:";
  for (double h : history) os << " " << h;
  throw SolveError(os.str());
}

void write_ledger_csv(const EnergyLedger& ledger, const SolverConfig& cfg,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write ledger file " + path);
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "# dt = %.17g\n# t_end = %.17g\n# picard_tol = %.17g\n"
                "# picard_max = %d\n# damping = %.17g\n# linear_rtol = %.17g\n"
                "# linear_method = %s\n# time_mass = %s\n",
                cfg.dt, cfg.t_end, cfg.picard_tol, cfg.picard_max, cfg.damping,
                cfg.linear_rtol, to_string(cfg.linear_method).c_str(),
                to_string(cfg.time_mass).c_str());
  out << buf;
  out << "step,t,kinetic,a_dissipation,drag_power,coriolis_power,"
         "external_power,picard_iters,linear_iters\n";
  for (const LedgerRow& r : ledger.rows) {
    // + 0.0 folds negative zeros, which otherwise survive %.17g.
    std::snprintf(buf, sizeof buf,
                  "%ld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%d\n", r.step,
                  r.t + 0.0, r.kinetic + 0.0, r.a_dissipation + 0.0,
                  r.drag_power + 0.0, r.coriolis_power + 0.0,
                  r.external_power + 0.0, r.picard_iters, r.linear_iters);
    out << buf;
  }
}

}  // namespace icevp
