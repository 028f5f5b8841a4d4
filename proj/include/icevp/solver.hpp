#pragma once

#include <string>
#include <vector>

#include "icevp/assembly.hpp"

namespace icevp {

enum class LinearMethod { SparseDirect, Krylov };

std::string to_string(LinearMethod method);
LinearMethod linear_method_from_string(const std::string& name);
std::string to_string(MassModel mass);
MassModel mass_model_from_string(const std::string& name);

struct SolverConfig {
  double dt = 1.0;     // [s], > 0
  double t_end = 1.0;  // [s], > 0 and an integer multiple of dt
  double picard_tol = 1e-8;  // relative V-norm increment
  int picard_max = 100;
  double damping = 1.0;  // in (0, 1]; halved automatically on increment growth
  double linear_rtol = 1e-10;
  LinearMethod linear_method = LinearMethod::SparseDirect;
  MassModel time_mass = MassModel::Lumped;
  void validate() const;
};

struct Problem {
  MeshPtr mesh;
  RheologyParams rheology;
  PhysParams phys;
  OceanForcing ocean;
  BodyForcing body;
  IceStrengthField strength;
  DofVector u0;
  void validate() const;
};

// Solves A x = b to a residual of linear_rtol * |b|. SparseDirect reports one
// iteration per solve; Krylov (restarted GMRES with diagonal preconditioning)
// reports its iteration count. Throws SolveError on singular matrices or
// unmet residuals.
std::vector<double> linear_solve(const SparseMatrix& A,
                                 const std::vector<double>& b,
                                 const SolverConfig& cfg,
                                 int* iterations = nullptr);

struct StepStats {
  int picard_iters = 0;
  int linear_iters = 0;
  std::vector<double> increments;  // V-norm Picard increments
};

// One implicit Euler step by Picard iteration on the lagged-coefficient
// systems; u^0 = u_prev. Throws SolveError with the increment history when
// picard_max is exceeded.
DofVector implicit_euler_step(const Problem& pb, const DofVector& u_prev,
                              double t_next, const SolverConfig& cfg,
                              StepStats* stats = nullptr);

struct LedgerRow {
  long step = 0;
  double t = 0.0;
  double kinetic = 0.0;         // (m/2) |u|_H^2, consistent mass
  double a_dissipation = 0.0;   // <A(u), u>
  double drag_power = 0.0;      // -<G(u), u>
  double coriolis_power = 0.0;  // <C(u), u>, zero up to round-off
  double external_power = 0.0;  // <body load, u>
  int picard_iters = 0;
  int linear_iters = 0;
  // In-memory diagnostics; not part of the CSV schema. mass_rate pairs the
  // discrete time derivative with u^n and therefore contains the implicit
  // Euler dissipation (m/2dt) |u^n - u^{n-1}|_M^2 on top of the kinetic
  // difference quotient.
  double mass_rate = 0.0;
  double energy_residual = 0.0;  // mass_rate + a_dissipation + coriolis_power
                                 //   - drag_power - external_power
};

struct EnergyLedger {
  std::vector<LedgerRow> rows;
};

// CSV with "# key = value" config preamble, fixed header
// step,t,kinetic,a_dissipation,drag_power,coriolis_power,external_power,
// picard_iters,linear_iters and 17 significant digits per value.
void write_ledger_csv(const EnergyLedger& ledger, const SolverConfig& cfg,
                      const std::string& path);

struct SimulationResult {
  std::vector<DofVector> snapshots;  // state at step 0 and every stored step
  std::vector<long> snapshot_steps;
  EnergyLedger ledger;
  bool completed = true;
  std::string error;  // set when a step failed; the ledger is partial then
};

// Runs t_end / dt implicit Euler steps. snapshot_every = k stores every k-th
// state (plus initial and final); 0 stores only initial and final. A step
// failure stops the run and returns the partial ledger with completed =
// false instead of throwing.
SimulationResult run_simulation(const Problem& pb, const SolverConfig& cfg,
                                int snapshot_every = 1);

// Picard iteration on the steady balance at time t, started from pb.u0.
DofVector steady_solve(const Problem& pb, double t, const SolverConfig& cfg);

}  // namespace icevp
