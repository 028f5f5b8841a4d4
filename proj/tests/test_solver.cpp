#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "icevp/random.hpp"
#include "icevp/solver.hpp"

using namespace icevp;

namespace {

std::filesystem::path temp_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "icevp_solver";
  std::filesystem::create_directories(dir);
  return dir;
}

// Drag-driven test problem: above-band strain rates, ocean current switched
// on, small wind stress.
Problem drag_problem(int n) {
  Problem pb;
  pb.mesh = build_rect_mesh(n, n, 1.0, 1.0);
  pb.rheology = RheologyParams::make(2.0, 2e-9, 2e-4, 0.0, DeltaMode::CutoffBoth);
  pb.phys.m = 1.2;
  pb.phys.omega = 0.3;
  pb.phys.g = 9.81;
  pb.ocean.c_ocean = 5.0;
  pb.ocean.theta = 0.4;
  pb.ocean.U = NodalVectorSeries::uniform({0.1, 0.0});
  pb.body.tau_atm = NodalVectorSeries::uniform({0.05, 0.02});
  pb.strength.P = NodalScalarSeries::uniform(2.0);
  pb.strength.P_floor = 1.0;
  pb.u0 = DofVector(pb.mesh);
  return pb;
}

SolverConfig tight_config() {
  SolverConfig cfg;
  cfg.dt = 0.1;
  cfg.t_end = 0.7;
  cfg.picard_tol = 1e-10;
  cfg.picard_max = 50;
  cfg.damping = 1.0;
  cfg.linear_rtol = 1e-11;
  return cfg;
}

double l2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("method and mass model names round trip") {
  CHECK(linear_method_from_string("sparse_direct") ==
        LinearMethod::SparseDirect);
  CHECK(linear_method_from_string("krylov") == LinearMethod::Krylov);
  CHECK(to_string(LinearMethod::Krylov) == "krylov");
  CHECK_THROWS_AS(linear_method_from_string("cg"), ConfigError);
  CHECK(mass_model_from_string("lumped") == MassModel::Lumped);
  CHECK(mass_model_from_string("consistent") == MassModel::Consistent);
  CHECK(to_string(MassModel::Consistent) == "consistent");
  CHECK_THROWS_AS(mass_model_from_string("diagonal"), ConfigError);
}

TEST_CASE("solver config validation") {
  SolverConfig ok;
  ok.dt = 0.25;
  ok.t_end = 1.0;
  CHECK_NOTHROW(ok.validate());

  SolverConfig c = ok;
  c.dt = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = ok;
  c.t_end = -1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = ok;
  c.dt = 0.3;  // 1.0 / 0.3 is not an integer
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("integer multiple"),
                       ConfigError);
  c = ok;
  c.picard_tol = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = ok;
  c.picard_max = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = ok;
  c.damping = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = ok;
  c.damping = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = ok;
  c.linear_rtol = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("linear solve hand system") {
  SparseMatrix A(3);
  A.add(0, 0, 4.0);
  A.add(0, 1, 1.0);
  A.add(1, 0, 1.0);
  A.add(1, 1, 3.0);
  A.add(2, 2, 2.0);
  A.finalize();
  const std::vector<double> b{1.0, 2.0, 2.0};

  for (LinearMethod method : {LinearMethod::SparseDirect,
                              LinearMethod::Krylov}) {
    SolverConfig cfg;
    cfg.linear_method = method;
    cfg.linear_rtol = 1e-12;
    int iters = -1;
    const auto x = linear_solve(A, b, cfg, &iters);
    REQUIRE(x.size() == 3);
    CHECK(x[0] == doctest::Approx(1.0 / 11.0).epsilon(1e-12));
    CHECK(x[1] == doctest::Approx(7.0 / 11.0).epsilon(1e-12));
    CHECK(x[2] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(iters >= 1);
    if (method == LinearMethod::SparseDirect) CHECK(iters == 1);
  }
}

TEST_CASE("linear solve edge cases") {
  SolverConfig cfg;

  SparseMatrix S(2);
  S.add(0, 0, 1.0);  // second row empty: singular
  S.finalize();
  CHECK_THROWS_AS(linear_solve(S, {1.0, 1.0}, cfg), SolveError);

  SparseMatrix Z(2);
  Z.add(0, 0, 1.0);
  Z.add(1, 1, 1.0);
  Z.finalize();
  int iters = -1;
  const auto x = linear_solve(Z, {0.0, 0.0}, cfg, &iters);
  CHECK(x == std::vector<double>{0.0, 0.0});
  CHECK(iters == 0);  // |b| = 0 short-circuits

  CHECK_THROWS_AS(linear_solve(Z, {1.0, 2.0, 3.0}, cfg), ConfigError);
  SparseMatrix U(2);
  CHECK_THROWS_AS(linear_solve(U, {1.0, 2.0}, cfg), ConfigError);
}

TEST_CASE("direct and Krylov solves agree on an assembled system") {
  const Problem pb = drag_problem(6);
  Rng rng(67);
  DofVector u_lag(pb.mesh), u_prev(pb.mesh);
  for (int i = 0; i < u_lag.size(); ++i) {
    u_lag[i] = 0.05 * rng.normal();
    u_prev[i] = 0.05 * rng.normal();
  }
  const AssembledSystem sys = assemble_picard_system(
      *pb.mesh, u_lag, u_prev, 0.1, 0.1, pb.strength, pb.ocean, pb.body,
      pb.phys, pb.rheology);

  SolverConfig direct;
  direct.linear_rtol = 1e-11;
  SolverConfig krylov = direct;
  krylov.linear_method = LinearMethod::Krylov;

  int it_d = 0, it_k = 0;
  const auto xd = linear_solve(sys.matrix, sys.rhs, direct, &it_d);
  const auto xk = linear_solve(sys.matrix, sys.rhs, krylov, &it_k);
  CHECK(it_d == 1);
  CHECK(it_k >= 1);

  // Both must satisfy the residual contract; the solutions then agree to a
  // condition-number-inflated multiple of it.
  const double bnorm = l2(sys.rhs);
  for (const auto* x : {&xd, &xk}) {
    const auto ax = sys.matrix.multiply(*x);
    std::vector<double> r(ax.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = ax[i] - sys.rhs[i];
    CHECK(l2(r) <= 1e-11 * bnorm);
  }
  std::vector<double> diff(xd.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = xd[i] - xk[i];
  CHECK(l2(diff) <= 1e-5 * (l2(xd) + 1e-300));
}

TEST_CASE("a linear regime step is a single assembled solve") {
  // With strain rates clamped above the band everywhere and no drag, the
  // lagged system does not depend on the lag point, so Picard hits the fixed
  // point on the first solve and confirms it on the second.
  Problem pb = drag_problem(4);
  pb.ocean.c_ocean = 0.0;
  pb.ocean.U = NodalVectorSeries::uniform({0.0, 0.0});
  Rng rng(71);
  DofVector u_prev(pb.mesh);
  for (int i = 0; i < u_prev.size(); ++i) u_prev[i] = rng.uniform(0.5, 1.5);
  pb.u0 = u_prev;

  SolverConfig cfg = tight_config();
  cfg.dt = 0.1;
  cfg.t_end = 0.1;
  cfg.picard_tol = 1e-12;

  StepStats st;
  const DofVector u = implicit_euler_step(pb, u_prev, cfg.dt, cfg, &st);
  CHECK(st.picard_iters == 2);  // one solve + one bitwise-identical confirm
  REQUIRE(st.increments.size() == 2);
  CHECK(st.increments[1] == 0.0);

  // Every element must see the same viscosity clamp at both iterates: above
  // the band, except all-boundary corner triangles, which are exactly zero
  // for any admissible field.
  for (int e = 0; e < pb.mesh->n_triangles(); ++e) {
    const double dp_prev =
        delta_p(element_sym_gradient(*pb.mesh, u_prev, e), pb.rheology);
    const double dp_next =
        delta_p(element_sym_gradient(*pb.mesh, u, e), pb.rheology);
    if (dp_prev == 0.0) {
      REQUIRE(dp_next == 0.0);
    } else {
      REQUIRE(dp_prev > pb.rheology.delta_hi);
      REQUIRE(dp_next > pb.rheology.delta_hi);
    }
  }

  const AssembledSystem sys = assemble_picard_system(
      *pb.mesh, u_prev, u_prev, cfg.dt, cfg.dt, pb.strength, pb.ocean,
      pb.body, pb.phys, pb.rheology, cfg.time_mass);
  const auto x = linear_solve(sys.matrix, sys.rhs, cfg);
  for (int i = 0; i < u.size(); ++i)
    CHECK(u[i] == x[static_cast<std::size_t>(i)]);
}

TEST_CASE("picard cap raises with the increment history") {
  const Problem pb = drag_problem(4);
  SolverConfig cfg = tight_config();
  cfg.picard_max = 1;
  cfg.picard_tol = 1e-14;
  try {
    implicit_euler_step(pb, pb.u0, cfg.dt, cfg);
    FAIL("expected SolveError");
  } catch (const SolveError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("did not converge within 1") != std::string::npos);
    CHECK(msg.find("increments:") != std::string::npos);
  }
}

TEST_CASE("simulation snapshots and ledger layout") {
  const Problem pb = drag_problem(4);
  const SolverConfig cfg = tight_config();  // 7 steps of 0.1

  const SimulationResult every3 = run_simulation(pb, cfg, 3);
  REQUIRE(every3.completed);
  CHECK(every3.error.empty());
  CHECK(every3.snapshot_steps == std::vector<long>{0, 3, 6, 7});
  CHECK(every3.snapshots.size() == 4);

  const SimulationResult ends = run_simulation(pb, cfg, 0);
  REQUIRE(ends.completed);
  CHECK(ends.snapshot_steps == std::vector<long>{0, 7});

  REQUIRE(every3.ledger.rows.size() == 7);
  for (std::size_t k = 0; k < 7; ++k) {
    const LedgerRow& row = every3.ledger.rows[k];
    CHECK(row.step == static_cast<long>(k + 1));
    CHECK(row.t == static_cast<double>(k + 1) * cfg.dt);
    CHECK(row.kinetic >= 0.0);
    CHECK(row.picard_iters >= 1);
    CHECK(row.linear_iters >= row.picard_iters);  // one solve per iteration
  }

  // Same problem, same config: bitwise reproducible.
  const SimulationResult again = run_simulation(pb, cfg, 3);
  REQUIRE(again.ledger.rows.size() == 7);
  for (std::size_t k = 0; k < 7; ++k) {
    CHECK(again.ledger.rows[k].kinetic == every3.ledger.rows[k].kinetic);
    CHECK(again.ledger.rows[k].a_dissipation ==
          every3.ledger.rows[k].a_dissipation);
  }

  CHECK_THROWS_AS(run_simulation(pb, cfg, -1), ConfigError);
}

TEST_CASE("ledger rows close the energy balance") {
  const Problem pb = drag_problem(5);
  const SolverConfig cfg = tight_config();
  const SimulationResult res = run_simulation(pb, cfg, 0);
  REQUIRE(res.completed);
  for (const LedgerRow& row : res.ledger.rows) {
    const double scale = std::abs(row.mass_rate) +
                         std::abs(row.a_dissipation) +
                         std::abs(row.drag_power) +
                         std::abs(row.coriolis_power) +
                         std::abs(row.external_power);
    if (scale == 0.0) {
      CHECK(row.energy_residual == 0.0);
    } else {
      CHECK(std::abs(row.energy_residual) <= 1e-8 * scale);
    }
    // The identity the residual encodes.
    CHECK(row.energy_residual ==
          row.mass_rate + row.a_dissipation + row.coriolis_power -
              row.drag_power - row.external_power);
  }
}

TEST_CASE("failed step returns a partial result") {
  const Problem pb = drag_problem(4);
  SolverConfig cfg = tight_config();
  cfg.picard_max = 1;
  cfg.picard_tol = 1e-14;
  const SimulationResult res = run_simulation(pb, cfg, 1);
  CHECK_FALSE(res.completed);
  CHECK(res.error.find("step 1 failed") != std::string::npos);
  CHECK(res.ledger.rows.empty());
  CHECK(res.snapshot_steps == std::vector<long>{0});
}

TEST_CASE("steady solve balances the operator against the load") {
  const Problem pb = drag_problem(5);
  SolverConfig cfg = tight_config();
  cfg.picard_tol = 1e-12;
  cfg.picard_max = 100;
  const DofVector u = steady_solve(pb, 0.0, cfg);

  const auto lhs = apply_operator(*pb.mesh, u, 0.0, pb.strength, pb.ocean,
                                  pb.phys, pb.rheology);
  const auto load = lumped_load_vector(
      *pb.mesh, body_load(0.0, pb.body, pb.phys, pb.mesh->n_vertices()));
  std::vector<double> r(lhs.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = lhs[i] - load[i];
  CHECK(l2(r) <= 1e-7 * (l2(load) + l2(lhs) + 1e-300));
}

TEST_CASE("ledger CSV format") {
  EnergyLedger ledger;
  LedgerRow r1;
  r1.step = 1;
  r1.t = 0.1 + 0.2;  // 0.30000000000000004: exercises the 17-digit round trip
  r1.kinetic = 1.2345678901234567e-3;
  r1.a_dissipation = -7.125;
  r1.drag_power = -0.0;  // must be folded to +0
  r1.coriolis_power = 3.0e-18;
  r1.external_power = 42.0;
  r1.picard_iters = 4;
  r1.linear_iters = 9;
  ledger.rows.push_back(r1);

  SolverConfig cfg;
  cfg.dt = 0.25;
  cfg.t_end = 1.0;
  const std::string path = (temp_dir() / "ledger.csv").string();
  write_ledger_csv(ledger, cfg, path);

  std::ifstream in(path);
  REQUIRE(in.good());
  std::string line;
  std::vector<std::string> preamble;
  while (std::getline(in, line) && !line.empty() && line[0] == '#')
    preamble.push_back(line);
  CHECK(preamble.size() == 8);
  CHECK(preamble[0] == "# dt = 0.25");
  CHECK(preamble[6] == "# linear_method = sparse_direct");

  // `line` now holds the column header.
  CHECK(line ==
        "step,t,kinetic,a_dissipation,drag_power,coriolis_power,"
        "external_power,picard_iters,linear_iters");

  REQUIRE(std::getline(in, line));
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) fields.push_back(f);
  REQUIRE(fields.size() == 9);
  CHECK(fields[0] == "1");
  CHECK(std::strtod(fields[1].c_str(), nullptr) == r1.t);
  CHECK(std::strtod(fields[2].c_str(), nullptr) == r1.kinetic);
  CHECK(std::strtod(fields[3].c_str(), nullptr) == r1.a_dissipation);
  CHECK(fields[4] == "0");  // negative zero folded
  CHECK(std::strtod(fields[5].c_str(), nullptr) == r1.coriolis_power);
  CHECK(std::strtod(fields[6].c_str(), nullptr) == r1.external_power);
  CHECK(fields[7] == "4");
  CHECK(fields[8] == "9");
}

TEST_CASE("problem validation") {
  Problem pb = drag_problem(3);
  CHECK_NOTHROW(pb.validate());

  Problem no_mesh = pb;
  no_mesh.mesh.reset();
  CHECK_THROWS_AS(no_mesh.validate(), ConfigError);

  Problem wrong_u0 = pb;
  wrong_u0.u0 = DofVector(build_rect_mesh(3, 3, 1.0, 1.0));
  CHECK_THROWS_WITH_AS(wrong_u0.validate(), doctest::Contains("u0"),
                       ConfigError);

  Problem wrong_nodes = pb;
  wrong_nodes.ocean.U = NodalVectorSeries::from_slices(
      {0.0}, {std::vector<Vec2>(4, Vec2{0.1, 0.0})});
  CHECK_THROWS_WITH_AS(wrong_nodes.validate(),
                       doctest::Contains("node count"), ConfigError);
}
