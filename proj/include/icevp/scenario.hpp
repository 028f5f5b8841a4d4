#pragma once

#include <string>

#include "icevp/solver.hpp"

namespace icevp {

// Flat sectioned key = value scenario description. Parsing applies defaults,
// validates every value, and rejects unknown sections or keys with the line
// number; echo_scenario() produces the canonical full form such that
// parse(echo(s)) == s.
struct Scenario {
  // [mesh]
  std::string mesh_type = "rect";  // rect | file
  int nx = 16;
  int ny = 16;
  double lx = 1.0;
  double ly = 1.0;
  std::string mesh_path;

  // [rheology]
  RheologyParams rheology;

  // [physics]
  PhysParams phys;

  // [ocean]  (u_type: zero | constant | file)
  double c_ocean = 0.0;
  double theta = 0.0;
  std::string u_type = "zero";
  Vec2 u_value{};
  std::string u_path;

  // [body]  (each field: zero | constant | file)
  struct FieldSpec {
    std::string type = "zero";
    Vec2 value{};
    std::string path;
  };
  FieldSpec tau_atm;
  FieldSpec grad_h;
  FieldSpec f_extra;

  // [ice_strength]  (p_type: constant | file)
  std::string p_type = "constant";
  double p_value = 27500.0;  // [N/m]
  double p_floor = 1.0;
  std::string p_path;

  // [initial]  (u0_type: zero | file)
  std::string u0_type = "zero";
  std::string u0_path;

  // [solver]
  SolverConfig solver;

  // [output]
  int snapshot_every = 0;
  std::string out_dir = "out";
};

Scenario parse_scenario(const std::string& path);
Scenario parse_scenario_text(const std::string& text,
                             const std::string& origin);
std::string echo_scenario(const Scenario& s);

// Loads meshes and forcing files and assembles a validated Problem.
Problem build_problem(const Scenario& s);

// Legacy-ASCII VTK snapshot: point vectors "velocity", point scalars "P",
// cell scalars "delta_p", "sigma_xx", "sigma_xy", "sigma_yy" and
// "yield_lhs_over_quarterP2" (the squared delta_p/delta ratio per element).
void write_snapshot(const TriMesh& mesh, const DofVector& u,
                    const std::vector<double>& P_nodal,
                    const RheologyParams& params, const std::string& path);

}  // namespace icevp
