#include "icevp/scenario.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace icevp {

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string strip(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct ParseCursor {
  const std::string& origin;
  int line = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError(origin + ":" + std::to_string(line) + ": " + what);
  }

  double number(const std::string& value) const {
    if (value.empty()) fail("expected a number");
    char* end = nullptr;
    const double x = std::strtod(value.c_str(), &end);
    if (end != value.c_str() + value.size())
      fail("malformed number \"" + value + "\"");
    return x;
  }

  int integer(const std::string& value) const {
    if (value.empty()) fail("expected an integer");
    char* end = nullptr;
    const long x = std::strtol(value.c_str(), &end, 10);
    if (end != value.c_str() + value.size())
      fail("malformed integer \"" + value + "\"");
    if (x < -1000000000L || x > 1000000000L) fail("integer out of range");
    return static_cast<int>(x);
  }
};

// Raw rheology keys; lambda is derived, so the struct is rebuilt through
// make() after parsing.
struct RheologyKeys {
  double e_bar = 2.0;
  double delta_lo = 2e-9;
  double delta_hi = 2e-4;
  double epsilon = 0.0;
  std::string mode = "cutoff_both";
};

}  // namespace

Scenario parse_scenario_text(const std::string& text,
                             const std::string& origin) {
  Scenario s;
  RheologyKeys rk;
  std::string section;
  std::set<std::string> seen;
  ParseCursor cur{origin};

  std::istringstream in(text);
  std::string raw;
  while (std::getline(in, raw)) {
    ++cur.line;
    const std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = strip(raw);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') cur.fail("unterminated section header");
      section = strip(line.substr(1, line.size() - 2));
      static const std::set<std::string> known{
          "mesh",         "rheology", "physics", "ocean", "body",
          "ice_strength", "initial",  "solver",  "output"};
      if (!known.count(section))
        cur.fail("unknown section [" + section + "]");
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) cur.fail("expected key = value");
    const std::string key = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));
    if (key.empty()) cur.fail("empty key");
    if (section.empty()) cur.fail("key before any [section]");
    if (!seen.insert(section + "." + key).second)
      cur.fail("duplicate key \"" + key + "\" in [" + section + "]");

    const auto is = [&](const char* k) { return key == k; };
    if (section == "mesh") {
      if (is("type")) s.mesh_type = value;
      else if (is("nx")) s.nx = cur.integer(value);
      else if (is("ny")) s.ny = cur.integer(value);
      else if (is("lx")) s.lx = cur.number(value);
      else if (is("ly")) s.ly = cur.number(value);
      else if (is("path")) s.mesh_path = value;
      else cur.fail("unknown key \"" + key + "\" in [mesh]");
    } else if (section == "rheology") {
      if (is("e_bar")) rk.e_bar = cur.number(value);
      else if (is("delta_lo")) rk.delta_lo = cur.number(value);
      else if (is("delta_hi")) rk.delta_hi = cur.number(value);
      else if (is("epsilon")) rk.epsilon = cur.number(value);
      else if (is("mode")) rk.mode = value;
      else cur.fail("unknown key \"" + key + "\" in [rheology]");
    } else if (section == "physics") {
      if (is("m")) s.phys.m = cur.number(value);
      else if (is("omega")) s.phys.omega = cur.number(value);
      else if (is("g")) s.phys.g = cur.number(value);
      else cur.fail("unknown key \"" + key + "\" in [physics]");
    } else if (section == "ocean") {
      if (is("c_ocean")) s.c_ocean = cur.number(value);
      else if (is("theta")) s.theta = cur.number(value);
      else if (is("u_type")) s.u_type = value;
      else if (is("u_value_x")) s.u_value.x = cur.number(value);
      else if (is("u_value_y")) s.u_value.y = cur.number(value);
      else if (is("u_path")) s.u_path = value;
      else cur.fail("unknown key \"" + key + "\" in [ocean]");
    } else if (section == "body") {
      Scenario::FieldSpec* f = nullptr;
      std::string tail;
      const struct {
        const char* prefix;
        Scenario::FieldSpec* spec;
      } routes[] = {{"tau_atm_", &s.tau_atm},
                    {"grad_h_", &s.grad_h},
                    {"f_extra_", &s.f_extra}};
      for (const auto& r : routes) {
        const std::string p(r.prefix);
        if (key.rfind(p, 0) == 0) {
          f = r.spec;
          tail = key.substr(p.size());
          break;
        }
      }
      if (f == nullptr) cur.fail("unknown key \"" + key + "\" in [body]");
      if (tail == "type") f->type = value;
      else if (tail == "value_x") f->value.x = cur.number(value);
      else if (tail == "value_y") f->value.y = cur.number(value);
      else if (tail == "path") f->path = value;
      else cur.fail("unknown key \"" + key + "\" in [body]");
    } else if (section == "ice_strength") {
      if (is("p_type")) s.p_type = value;
      else if (is("p_value")) s.p_value = cur.number(value);
      else if (is("p_floor")) s.p_floor = cur.number(value);
      else if (is("p_path")) s.p_path = value;
      else cur.fail("unknown key \"" + key + "\" in [ice_strength]");
    } else if (section == "initial") {
      if (is("u0_type")) s.u0_type = value;
      else if (is("u0_path")) s.u0_path = value;
      else cur.fail("unknown key \"" + key + "\" in [initial]");
    } else if (section == "solver") {
      if (is("dt")) s.solver.dt = cur.number(value);
      else if (is("t_end")) s.solver.t_end = cur.number(value);
      else if (is("picard_tol")) s.solver.picard_tol = cur.number(value);
      else if (is("picard_max")) s.solver.picard_max = cur.integer(value);
      else if (is("damping")) s.solver.damping = cur.number(value);
      else if (is("linear_rtol")) s.solver.linear_rtol = cur.number(value);
      else if (is("linear_method"))
        s.solver.linear_method = linear_method_from_string(value);
      else if (is("time_mass")) s.solver.time_mass = mass_model_from_string(value);
      else cur.fail("unknown key \"" + key + "\" in [solver]");
    } else {  // output
      if (is("snapshot_every")) s.snapshot_every = cur.integer(value);
      else if (is("out_dir")) s.out_dir = value;
      else cur.fail("unknown key \"" + key + "\" in [output]");
    }
  }

  // Cross-field validation; errors here name the file but not a line.
  const auto fail = [&origin](const std::string& what) {
    throw ConfigError(origin + ": " + what);
  };
  s.rheology = RheologyParams::make(rk.e_bar, rk.delta_lo, rk.delta_hi,
                                    rk.epsilon, delta_mode_from_string(rk.mode));
  s.rheology.validate();
  s.phys.validate();

  if (s.mesh_type == "rect") {
    if (s.nx < 1 || s.ny < 1) fail("[mesh] nx and ny must be >= 1");
    if (!(s.lx > 0.0) || !(s.ly > 0.0)) fail("[mesh] lx and ly must be > 0");
  } else if (s.mesh_type == "file") {
    if (s.mesh_path.empty()) fail("[mesh] type = file requires path");
  } else {
    fail("[mesh] unknown type \"" + s.mesh_type + "\" (expected rect or file)");
  }

  OceanForcing probe;
  probe.c_ocean = s.c_ocean;
  probe.theta = s.theta;
  probe.validate();
  const auto check_vec_type = [&fail](const std::string& type,
                                      const std::string& path,
                                      const std::string& what) {
    if (type != "zero" && type != "constant" && type != "file")
      fail(what + ": unknown type \"" + type +
           "\" (expected zero, constant or file)");
    if (type == "file" && path.empty()) fail(what + ": file type requires a path");
  };
  check_vec_type(s.u_type, s.u_path, "[ocean] u");
  check_vec_type(s.tau_atm.type, s.tau_atm.path, "[body] tau_atm");
  check_vec_type(s.grad_h.type, s.grad_h.path, "[body] grad_h");
  check_vec_type(s.f_extra.type, s.f_extra.path, "[body] f_extra");

  if (s.p_type == "constant") {
    if (!(s.p_floor > 0.0)) fail("[ice_strength] p_floor must be > 0");
    if (s.p_value < s.p_floor)
      fail("[ice_strength] p_value must not undercut p_floor");
  } else if (s.p_type == "file") {
    if (s.p_path.empty()) fail("[ice_strength] type = file requires p_path");
  } else {
    fail("[ice_strength] unknown p_type \"" + s.p_type +
         "\" (expected constant or file)");
  }

  if (s.u0_type == "file") {
    if (s.u0_path.empty()) fail("[initial] u0_type = file requires u0_path");
  } else if (s.u0_type != "zero") {
    fail("[initial] unknown u0_type \"" + s.u0_type +
         "\" (expected zero or file)");
  }

  s.solver.validate();
  if (s.snapshot_every < 0) fail("[output] snapshot_every must be >= 0");
  if (s.out_dir.empty()) fail("[output] out_dir must not be empty");
  return s;
}

Scenario parse_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str(), path);
}

std::string echo_scenario(const Scenario& s) {
  std::ostringstream o;
  o << "[mesh]\n";
  o << "type = " << s.mesh_type << "\n";
  o << "nx = " << s.nx << "\n";
  o << "ny = " << s.ny << "\n";
  o << "lx = " << fmt(s.lx) << "\n";
  o << "ly = " << fmt(s.ly) << "\n";
  o << "path = " << s.mesh_path << "\n\n";

  o << "[rheology]\n";
  o << "e_bar = " << fmt(s.rheology.e_bar) << "\n";
  o << "delta_lo = " << fmt(s.rheology.delta_lo) << "\n";
  o << "delta_hi = " << fmt(s.rheology.delta_hi) << "\n";
  o << "epsilon = " << fmt(s.rheology.epsilon) << "\n";
  o << "mode = " << to_string(s.rheology.mode) << "\n\n";

  o << "[physics]\n";
  o << "m = " << fmt(s.phys.m) << "\n";
  o << "omega = " << fmt(s.phys.omega) << "\n";
  o << "g = " << fmt(s.phys.g) << "\n\n";

  o << "[ocean]\n";
  o << "c_ocean = " << fmt(s.c_ocean) << "\n";
  o << "theta = " << fmt(s.theta) << "\n";
  o << "u_type = " << s.u_type << "\n";
  o << "u_value_x = " << fmt(s.u_value.x) << "\n";
  o << "u_value_y = " << fmt(s.u_value.y) << "\n";
  o << "u_path = " << s.u_path << "\n\n";

  o << "[body]\n";
  const auto field = [&o](const char* name, const Scenario::FieldSpec& f) {
    o << name << "_type = " << f.type << "\n";
    o << name << "_value_x = " << fmt(f.value.x) << "\n";
    o << name << "_value_y = " << fmt(f.value.y) << "\n";
    o << name << "_path = " << f.path << "\n";
  };
  field("tau_atm", s.tau_atm);
  field("grad_h", s.grad_h);
  field("f_extra", s.f_extra);
  o << "\n";

  o << "[ice_strength]\n";
  o << "p_type = " << s.p_type << "\n";
  o << "p_value = " << fmt(s.p_value) << "\n";
  o << "p_floor = " << fmt(s.p_floor) << "\n";
  o << "p_path = " << s.p_path << "\n\n";

  o << "[initial]\n";
  o << "u0_type = " << s.u0_type << "\n";
  o << "u0_path = " << s.u0_path << "\n\n";

  o << "[solver]\n";
  o << "dt = " << fmt(s.solver.dt) << "\n";
  o << "t_end = " << fmt(s.solver.t_end) << "\n";
  o << "picard_tol = " << fmt(s.solver.picard_tol) << "\n";
  o << "picard_max = " << s.solver.picard_max << "\n";
  o << "damping = " << fmt(s.solver.damping) << "\n";
  o << "linear_rtol = " << fmt(s.solver.linear_rtol) << "\n";
  o << "linear_method = " << to_string(s.solver.linear_method) << "\n";
  o << "time_mass = " << to_string(s.solver.time_mass) << "\n\n";

  o << "[output]\n";
  o << "snapshot_every = " << s.snapshot_every << "\n";
  o << "out_dir = " << s.out_dir << "\n";
  return o.str();
}

Problem build_problem(const Scenario& s) {
  Problem pb;
  pb.mesh = s.mesh_type == "rect" ? build_rect_mesh(s.nx, s.ny, s.lx, s.ly)
                                  : load_mesh(s.mesh_path);
  pb.rheology = s.rheology;
  pb.phys = s.phys;

  pb.ocean.c_ocean = s.c_ocean;
  pb.ocean.theta = s.theta;
  const auto vec_series = [](const std::string& type, Vec2 value,
                             const std::string& path) {
    if (type == "zero") return NodalVectorSeries::uniform(Vec2{});
    if (type == "constant") return NodalVectorSeries::uniform(value);
    return load_vector_series_csv(path);
  };
  pb.ocean.U = vec_series(s.u_type, s.u_value, s.u_path);
  pb.body.tau_atm = vec_series(s.tau_atm.type, s.tau_atm.value, s.tau_atm.path);
  pb.body.grad_H = vec_series(s.grad_h.type, s.grad_h.value, s.grad_h.path);
  pb.body.f_extra = vec_series(s.f_extra.type, s.f_extra.value, s.f_extra.path);

  if (s.p_type == "constant")
    pb.strength.P = NodalScalarSeries::uniform(s.p_value);
  else
    pb.strength.P = load_scalar_series_csv(s.p_path);
  pb.strength.P_floor = s.p_floor;

  pb.u0 = DofVector(pb.mesh);
  if (s.u0_type == "file") {
    // The initial state is read at t = 0; files must cover that time. Values
    // on boundary vertices are dropped to keep the zero trace.
    const NodalVectorSeries series = load_vector_series_csv(s.u0_path);
    const std::vector<Vec2> vals = series.eval_all(0.0, pb.mesh->n_vertices());
    for (int v = 0; v < pb.mesh->n_vertices(); ++v)
      pb.u0.set_vertex(v, vals[static_cast<std::size_t>(v)]);
  }

  pb.validate();
  return pb;
}

void write_snapshot(const TriMesh& mesh, const DofVector& u,
                    const std::vector<double>& P_nodal,
                    const RheologyParams& params, const std::string& path) {
  if (static_cast<int>(P_nodal.size()) != mesh.n_vertices())
    throw ConfigError("snapshot: strength node count does not match the mesh");
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write snapshot file " + path);

  out << "# vtk DataFile Version 3.0\n";
  out << "ice velocity and stress state\n";
  out << "ASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.n_vertices() << " double\n";
  for (const Vec2& p : mesh.vertices)
    out << fmt(p.x) << " " << fmt(p.y) << " 0\n";
  out << "CELLS " << mesh.n_triangles() << " " << 4 * mesh.n_triangles()
      << "\n";
  for (const auto& t : mesh.triangles)
    out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
  out << "CELL_TYPES " << mesh.n_triangles() << "\n";
  for (int e = 0; e < mesh.n_triangles(); ++e) out << "5\n";

  out << "POINT_DATA " << mesh.n_vertices() << "\n";
  out << "VECTORS velocity double\n";
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    const Vec2 uv = u.at_vertex(v);
    out << fmt(uv.x) << " " << fmt(uv.y) << " 0\n";
  }
  out << "SCALARS P double 1\n";
  out << "LOOKUP_TABLE default\n";
  for (double p : P_nodal) out << fmt(p) << "\n";

  std::vector<SymTensor2> stress(static_cast<std::size_t>(mesh.n_triangles()));
  std::vector<double> dp(stress.size()), ratio2(stress.size());
  for (int e = 0; e < mesh.n_triangles(); ++e) {
    const auto& tri = mesh.triangles[static_cast<std::size_t>(e)];
    const double pc = (P_nodal[static_cast<std::size_t>(tri[0])] +
                       P_nodal[static_cast<std::size_t>(tri[1])] +
                       P_nodal[static_cast<std::size_t>(tri[2])]) /
                      3.0;
    const SymTensor2 du = element_sym_gradient(mesh, u, e);
    const std::size_t i = static_cast<std::size_t>(e);
    stress[i] = sigma(pc, du, params);
    dp[i] = delta_p(du, params);
    // Yield-identity left side over P^2/4 equals (delta_p / delta)^2; the
    // scalar profile gives that ratio with the plastic 0/0 resolved to 1.
    const double r = scalar_profile(dp[i], params);
    ratio2[i] = r * r;
  }

  out << "CELL_DATA " << mesh.n_triangles() << "\n";
  const auto cell_scalar = [&out](const char* name,
                                  const std::vector<double>& vals) {
    out << "SCALARS " << name << " double 1\n";
    out << "LOOKUP_TABLE default\n";
    for (double v : vals) out << fmt(v) << "\n";
  };
  cell_scalar("delta_p", dp);
  std::vector<double> comp(stress.size());
  for (std::size_t i = 0; i < stress.size(); ++i) comp[i] = stress[i].xx;
  cell_scalar("sigma_xx", comp);
  for (std::size_t i = 0; i < stress.size(); ++i) comp[i] = stress[i].xy;
  cell_scalar("sigma_xy", comp);
  for (std::size_t i = 0; i < stress.size(); ++i) comp[i] = stress[i].yy;
  cell_scalar("sigma_yy", comp);
  cell_scalar("yield_lhs_over_quarterP2", ratio2);

  if (!out) throw ConfigError("failed while writing snapshot file " + path);
}

}  // namespace icevp
