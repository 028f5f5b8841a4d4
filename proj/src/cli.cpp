#include "icevp/cli.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "icevp/scenario.hpp"
#include "icevp/verify.hpp"

namespace icevp {

namespace {

std::string resolve_out_dir(const Scenario& s, const std::string& cli_flag) {
  std::string out = s.out_dir;
  if (const char* env = std::getenv("ICEVP_OUT_DIR"); env != nullptr && *env)
    out = env;
  if (!cli_flag.empty()) out = cli_flag;
  return out;
}

int do_run(const std::string& scenario_path, const std::string& out_flag) {
  const Scenario s = parse_scenario(scenario_path);
  const Problem pb = build_problem(s);
  const std::string out = resolve_out_dir(s, out_flag);
  std::filesystem::create_directories(out);

  {
    std::ofstream echo(out + "/echo.scenario");
    if (!echo) throw ConfigError("cannot write to output directory " + out);
    echo << echo_scenario(s);
  }

  const SimulationResult res = run_simulation(pb, s.solver, s.snapshot_every);
  write_ledger_csv(res.ledger, s.solver, out + "/ledger.csv");
  for (std::size_t i = 0; i < res.snapshots.size(); ++i) {
    const long step = res.snapshot_steps[i];
    const double t = static_cast<double>(step) * s.solver.dt;
    char name[32];
    std::snprintf(name, sizeof name, "/state_%06ld.vtk", step);
    write_snapshot(*pb.mesh, res.snapshots[i],
                   pb.strength.P.eval_all(t, pb.mesh->n_vertices()),
                   s.rheology, out + name);
  }

  if (!res.completed) {
    std::cerr << "run failed: " << res.error << "\n";
    std::cerr << "partial ledger written to " << out << "/ledger.csv\n";
    return 1;
  }
  std::cout << "completed " << res.ledger.rows.size() << " steps, "
            << res.snapshots.size() << " snapshots -> " << out << "\n";
  return 0;
}

int do_verify(const std::string& suite, long long samples,
              std::uint64_t seed) {
  using namespace verify;
  bool all_pass = true;
  const auto emit = [&all_pass](const PropertyReport& r) {
    std::cout << to_json(r) << "\n";
    if (!r.note.empty()) std::cerr << r.name << ": " << r.note << "\n";
    all_pass = all_pass && r.pass;
  };
  const bool all = suite == "all";

  if (all || suite == "rheology") {
    const struct {
      DeltaMode mode;
      double eps;
    } modes[] = {{DeltaMode::CutoffBoth, 0.0},  {DeltaMode::Plastic, 0.0},
                 {DeltaMode::EpsOnly, 1e-8},    {DeltaMode::EpsUpper, 1e-8},
                 {DeltaMode::EpsUpperMax, 1e-8}, {DeltaMode::EpsBoth, 1e-8}};
    for (const auto& m : modes) {
      const RheologyParams params =
          RheologyParams::make(2.0, 2e-9, 2e-4, m.eps, m.mode);
      emit(check_yield_identity(samples, params, seed));
      emit(check_pointwise_monotonicity(samples, params, seed + 1));
    }
  }
  if (all || suite == "operator") {
    const Problem pb = make_property_problem(16, seed);
    const int n_pairs =
        static_cast<int>(std::clamp<long long>(samples / 25000, 8, 400));
    emit(check_discrete_monotonicity(pb, n_pairs, seed + 2));
    emit(check_coercivity(pb, n_pairs, seed + 3));
  }
  if (all || suite == "drag") {
    const long long n_vec = std::max<long long>(1000, samples / 25);
    emit(scan_drag_monotonicity(n_vec, 25, seed + 4));
    emit(scan_discriminant(1e-3));
  }
  if (all || suite == "contraction") {
    const Problem pb = make_contraction_problem(32);
    const SolverConfig cfg = contraction_config();
    emit(check_contraction(pb, cfg, 1e-3, 100,
                           ContractionVariant::InitialData, seed + 5));
    emit(check_contraction(pb, cfg, 1e-3, 100, ContractionVariant::Forcing,
                           seed + 6));
  }
  return all_pass ? 0 : 3;
}

int do_convergence(const std::vector<int>& levels) {
  const verify::ConvergenceReport rep =
      verify::manufactured_convergence(levels, RheologyParams{}, 2.0);
  std::cout << verify::to_json(rep) << "\n";
  const bool pass = rep.observed_order_h >= 1.8 && rep.observed_order_v >= 0.9;
  if (!pass)
    std::cerr << "convergence orders below the expected 2 (L2) / 1 "
                 "(gradient) rates\n";
  return pass ? 0 : 3;
}

int do_mesh_info(const std::string& scenario_path) {
  const Scenario s = parse_scenario(scenario_path);
  const MeshPtr mesh = s.mesh_type == "rect"
                           ? build_rect_mesh(s.nx, s.ny, s.lx, s.ly)
                           : load_mesh(s.mesh_path);
  double area = 0.0;
  double h_min = std::numeric_limits<double>::infinity();
  double h_max = 0.0;
  for (int e = 0; e < mesh->n_triangles(); ++e) {
    area += element_geometry(*mesh, e).area;
    const auto& tri = mesh->triangles[static_cast<std::size_t>(e)];
    for (int k = 0; k < 3; ++k) {
      const Vec2 d = mesh->vertices[static_cast<std::size_t>(tri[k])] -
                     mesh->vertices[static_cast<std::size_t>(tri[(k + 1) % 3])];
      h_min = std::min(h_min, norm(d));
      h_max = std::max(h_max, norm(d));
    }
  }
  nlohmann::json j;
  j["vertices"] = mesh->n_vertices();
  j["triangles"] = mesh->n_triangles();
  j["interior_vertices"] = mesh->n_interior;
  j["dofs"] = mesh->n_dofs();
  j["area"] = area;
  j["h_min"] = h_min;
  j["h_max"] = h_max;
  std::cout << j.dump() << "\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"P1 finite-element solver for Hibler's visco-plastic sea-ice "
               "momentum balance with strain-rate cut-off"};
  app.name("icevp");
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_flag;
  CLI::App* cmd_run = app.add_subcommand(
      "run", "Time-step a scenario and write ledger and snapshots");
  cmd_run->add_option("scenario", scenario_path, "scenario file")->required();
  cmd_run->add_option("--out-dir", out_flag,
                      "output directory (overrides scenario and ICEVP_OUT_DIR)");

  std::string suite = "all";
  long long samples = 200000;
  std::uint64_t seed = 12345;
  CLI::App* cmd_verify = app.add_subcommand(
      "verify", "Run property checks and print one JSON report per line");
  cmd_verify->add_option("--suite", suite, "rheology|operator|drag|contraction|all")
      ->check(CLI::IsMember(
          {"rheology", "operator", "drag", "contraction", "all"}));
  cmd_verify->add_option("--samples", samples, "sample budget per check")
      ->check(CLI::PositiveNumber);
  cmd_verify->add_option("--seed", seed, "random seed");

  std::vector<int> levels{8, 16, 32, 64};
  CLI::App* cmd_conv = app.add_subcommand(
      "convergence", "Mesh-refinement study against a closed-form solution");
  cmd_conv->add_option("--levels", levels, "mesh sizes, e.g. 8,16,32")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);

  std::string info_path;
  CLI::App* cmd_info =
      app.add_subcommand("mesh-info", "Print mesh statistics as JSON");
  cmd_info->add_option("scenario", info_path, "scenario file")->required();

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("icevp");
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (cmd_run->parsed()) return do_run(scenario_path, out_flag);
    if (cmd_verify->parsed()) return do_verify(suite, samples, seed);
    if (cmd_conv->parsed()) return do_convergence(levels);
    return do_mesh_info(info_path);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const SolveError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace icevp
