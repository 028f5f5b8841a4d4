#include "icevp/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "icevp/sampling.hpp"

namespace icevp::verify {

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt(const SymTensor2& z) {
  return "[" + fmt(z.xx) + ", " + fmt(z.xy) + ", " + fmt(z.yy) + "]";
}

std::string fmt(Vec2 v) { return "(" + fmt(v.x) + ", " + fmt(v.y) + ")"; }

const char* band_name(int which) {
  switch (which % 3) {
    case 0: return "below";
    case 1: return "inside";
    default: return "above";
  }
}

DeltaBand band_of(int which) {
  switch (which % 3) {
    case 0: return DeltaBand::Below;
    case 1: return DeltaBand::Inside;
    default: return DeltaBand::Above;
  }
}

// Max element delta_p target in the band picked by `which`, log-uniform.
double band_target(Rng& rng, const RheologyParams& p, int which) {
  switch (which % 3) {
    case 0: return rng.log_uniform(1e-3 * p.delta_lo, p.delta_lo);
    case 1: return rng.log_uniform(p.delta_lo, p.delta_hi);
    default: return rng.log_uniform(p.delta_hi, 1e3 * p.delta_hi);
  }
}

double element_strength(const std::vector<double>& P_nodal,
                        const std::array<int, 3>& tri) {
  return (P_nodal[static_cast<std::size_t>(tri[0])] +
          P_nodal[static_cast<std::size_t>(tri[1])] +
          P_nodal[static_cast<std::size_t>(tri[2])]) /
         3.0;
}

double mass_norm(const DofVector& u, MassModel mass) {
  return mass == MassModel::Lumped ? h_norm_lumped(u) : h_norm_consistent(u);
}

}  // namespace

PropertyReport check_yield_identity(long long n, const RheologyParams& params,
                                    std::uint64_t seed) {
  params.validate();
  Rng rng(seed);
  PropertyReport rep;
  rep.name = "yield_identity[" + to_string(params.mode) + "]";
  rep.samples = n;
  rep.tolerance = 1e-12;
  for (long long i = 0; i < n; ++i) {
    const int which = static_cast<int>(i % 3);
    const SymTensor2 z = random_sym_in_band(rng, params, band_of(which));
    const double strength = rng.log_uniform(1e-3, 1e5);
    const double dp = delta_p(z, params);
    const double d = delta_reg(z, params);
    const double ratio = dp / d;
    // The identity's right side is (P^2/4)(dp/delta)^2; when the ratio is
    // small the two sides cancel against the (P^2/4) from -(P/2) Id, so the
    // normalization keeps at least that magnitude.
    const double scale =
        0.25 * strength * strength * std::max(1.0, ratio * ratio);
    const double viol = std::abs(yield_residual(strength, z, params)) / scale;
    if (viol > rep.worst_violation) {
      rep.worst_violation = viol;
      rep.witness = "P=" + fmt(strength) + " z=" + fmt(z) +
                    " band=" + band_name(which) + " delta_p=" + fmt(dp) +
                    " delta=" + fmt(d);
    }
  }
  rep.pass = rep.worst_violation <= rep.tolerance;
  return rep;
}

PropertyReport check_pointwise_monotonicity(long long n,
                                            const RheologyParams& params,
                                            std::uint64_t seed) {
  params.validate();
  Rng rng(seed);
  PropertyReport rep;
  rep.name = "pointwise_monotonicity[" + to_string(params.mode) + "]";
  rep.tolerance = 1e-12;

  long long count = 0;
  for (long long i = 0; i < n; ++i) {
    SymTensor2 z1, z2;
    const bool near_parallel = (i % 8) == 7;
    if (near_parallel) {
      // Degenerate-direction stress pairs. The offset lives in the tangent
      // space of delta_p at z1 (D^lambda metric), where every branch has
      // curvature 1/delta, so the true gap is ~ P |w|^2 / delta. sigma
      // itself carries absolute round-off ~ eps_mach * P from the
      // -(P/2) Id term, so offsets below the crossover
      // eta ~ eps_mach * delta / |z1| would only measure that noise; the
      // floor keeps a ~1e3 margin above it. Radial degeneracy (true gap
      // exactly zero) is covered bitwise by the witness sweep below.
      z1 = random_sym_any_band(rng, params);
      const double nz1 = norm(z1);
      const SymTensor2 mz1 = d_lambda(z1, params);
      const double mzz = ddot(mz1, z1);  // delta_p(z1)^2 > 0
      SymTensor2 tang{};
      double tn = 0.0;
      do {
        const SymTensor2 dir{rng.normal(), rng.normal(), rng.normal()};
        tang = dir - (ddot(mz1, dir) / mzz) * z1;
        tn = norm(tang);
      } while (!(tn > 1e-3));
      const double eta_lo =
          std::max(1e-12, 1e4 * std::numeric_limits<double>::epsilon() *
                              delta_reg(z1, params) / nz1);
      const double eta = rng.log_uniform(eta_lo, std::max(1e-6, 1e2 * eta_lo));
      z2 = z1 + (eta * nz1 / tn) * tang;
    } else {
      z1 = random_sym_in_band(rng, params, band_of(static_cast<int>(i % 3)));
      z2 = random_sym_in_band(rng, params,
                              band_of(static_cast<int>((i / 3) % 3)));
    }
    const double strength = rng.log_uniform(1e-3, 1e5);
    const SymTensor2 s1 = sigma(strength, z1, params);
    const SymTensor2 s2 = sigma(strength, z2, params);
    const double gap = ddot(s1 - s2, z1 - z2);
    const double nz = norm(z1) + norm(z2);
    const double viol = std::max(0.0, -gap) / (strength * nz * nz);
    ++count;
    if (viol > rep.worst_violation) {
      rep.worst_violation = viol;
      rep.witness = "P=" + fmt(strength) + " z1=" + fmt(z1) +
                    " z2=" + fmt(z2) +
                    (near_parallel ? " (near-parallel)" : "");
    }
  }

  // Non-strictness witness: z2 = 2 z1 maps to the same stress whenever the
  // denominator branch is unchanged (any z for Plastic; both rates inside the
  // cut-off band for CutoffBoth). Power-of-two scaling makes every float op
  // scale exactly, so the gap must come out as literal 0.0, not merely small.
  if (params.mode == DeltaMode::CutoffBoth ||
      params.mode == DeltaMode::Plastic) {
    const long long n_wit = std::max<long long>(1, n / 1000);
    for (long long i = 0; i < n_wit; ++i) {
      SymTensor2 z1;
      if (params.mode == DeltaMode::CutoffBoth) {
        // Margin factor 2 at both ends keeps z1 and 2 z1 strictly in band
        // despite the sampler's rescale round-off.
        const double target =
            rng.log_uniform(2.0 * params.delta_lo, 0.25 * params.delta_hi);
        SymTensor2 g = random_sym_in_band(rng, params, DeltaBand::Inside);
        z1 = (target / delta_p(g, params)) * g;
      } else {
        z1 = random_sym_any_band(rng, params);
      }
      const SymTensor2 z2 = 2.0 * z1;
      const double strength = rng.log_uniform(1e-3, 1e5);
      const SymTensor2 s1 = sigma(strength, z1, params);
      const SymTensor2 s2 = sigma(strength, z2, params);
      const double gap = ddot(s1 - s2, z1 - z2);
      ++count;
      if (gap != 0.0) {
        rep.worst_violation =
            std::max(rep.worst_violation, 2.0 * rep.tolerance);
        rep.witness = "exact-zero witness broke: P=" + fmt(strength) +
                      " z1=" + fmt(z1) + " gap=" + fmt(gap);
        rep.note =
            "z2 = 2 z1 must reproduce sigma bitwise; a nonzero gap means the "
            "monotonicity gap degenerates inexactly";
      }
    }
    if (rep.note.empty())
      rep.note = "exact-zero witness z2 = 2 z1 held on " +
                 std::to_string(n_wit) + " samples";
  }

  rep.samples = count;
  rep.pass = rep.worst_violation <= rep.tolerance;
  return rep;
}

PropertyReport check_discrete_monotonicity(const Problem& pb, int n_pairs,
                                           std::uint64_t seed) {
  pb.validate();
  Rng rng(seed);
  const TriMesh& mesh = *pb.mesh;
  const RheologyParams& prm = pb.rheology;
  const double t = 0.0;
  const std::vector<double> w = lumped_mass(mesh);
  const std::vector<double> P_nodal =
      pb.strength.P.eval_all(t, mesh.n_vertices());
  const std::vector<Vec2> U = pb.ocean.U.eval_all(t, mesh.n_vertices());

  PropertyReport rep;
  rep.name = "discrete_monotonicity";
  rep.samples = n_pairs;
  rep.tolerance = 1e-10;

  for (int i = 0; i < n_pairs; ++i) {
    DofVector u = random_dof_with_max_deltap(rng, pb.mesh, prm,
                                             band_target(rng, prm, i));
    DofVector v;
    const bool near_parallel = (i % 4) == 3;
    if (near_parallel) {
      DofVector pert = random_dof_with_max_deltap(rng, pb.mesh, prm,
                                                  band_target(rng, prm, i));
      v = u + (1e-8 * max_speed(u) / std::max(max_speed(pert), 1e-300)) * pert;
    } else {
      v = random_dof_with_max_deltap(rng, pb.mesh, prm,
                                     band_target(rng, prm, i / 3));
    }

    const std::vector<double> ru =
        apply_operator(mesh, u, t, pb.strength, pb.ocean, pb.phys, prm);
    const std::vector<double> rv =
        apply_operator(mesh, v, t, pb.strength, pb.ocean, pb.phys, prm);
    std::vector<double> diff(ru.size());
    for (std::size_t k = 0; k < ru.size(); ++k) diff[k] = ru[k] - rv[k];
    const double gap = pairing(diff, u - v);

    // Natural magnitude of each bilinear part at the pair.
    double scale = 0.0;
    for (int e = 0; e < mesh.n_triangles(); ++e) {
      const ElementGeometry geo = element_geometry(mesh, e);
      const double nu = norm(element_sym_gradient(mesh, u, e));
      const double nv = norm(element_sym_gradient(mesh, v, e));
      scale += geo.area * element_strength(P_nodal, mesh.triangles[e]) *
               (nu + nv) * (nu + nv);
    }
    for (int vx = 0; vx < mesh.n_vertices(); ++vx) {
      const Vec2 uu = u.at_vertex(vx);
      const Vec2 vv = v.at_vertex(vx);
      const Vec2 Uo = U[static_cast<std::size_t>(vx)];
      const double du = norm(Uo - uu) + norm(Uo - vv);
      const double su = norm(uu) + norm(vv);
      scale += pb.ocean.c_ocean * w[static_cast<std::size_t>(vx)] * du * du * du;
      scale += pb.phys.m * std::abs(pb.phys.omega) *
               w[static_cast<std::size_t>(vx)] * su * su;
    }
    if (scale == 0.0) scale = 1.0;

    const double viol = std::max(0.0, -gap) / scale;
    if (viol > rep.worst_violation) {
      rep.worst_violation = viol;
      rep.witness = "pair " + std::to_string(i) + " gap=" + fmt(gap) +
                    " scale=" + fmt(scale) +
                    (near_parallel ? " (near-parallel)" : "");
    }
  }
  rep.pass = rep.worst_violation <= rep.tolerance;
  return rep;
}

PropertyReport check_coercivity(const Problem& pb, int n_fields,
                                std::uint64_t seed) {
  pb.validate();
  const RheologyParams& prm = pb.rheology;
  if (prm.mode != DeltaMode::CutoffBoth && prm.mode != DeltaMode::EpsUpper &&
      prm.mode != DeltaMode::EpsBoth)
    throw ConfigError(
        "coercivity bound requires a delta capped by delta_hi (CutoffBoth, "
        "EpsUpper or EpsBoth)");

  Rng rng(seed);
  const TriMesh& mesh = *pb.mesh;
  const double t = 0.0;
  const std::vector<double> P_nodal =
      pb.strength.P.eval_all(t, mesh.n_vertices());

  PropertyReport rep;
  rep.name = "coercivity[" + to_string(prm.mode) + "]";
  rep.samples = n_fields;
  rep.tolerance = 1e-10;

  for (int i = 0; i < n_fields; ++i) {
    // Amplitude cycle: the three cut-off bands plus far-above-band fields up
    // to 1e6 times the upper cut-off.
    double target = 0.0;
    if (i % 4 == 3)
      target = rng.log_uniform(1e5 * prm.delta_hi, 1e6 * prm.delta_hi);
    else
      target = band_target(rng, prm, i % 4);
    const DofVector u = random_dof_with_max_deltap(rng, pb.mesh, prm, target);

    const OperatorParts parts =
        apply_operator_parts(mesh, u, t, pb.strength, pb.ocean, pb.phys, prm);
    const double lhs = pairing(parts.a_part, u);

    double bound = 0.0;
    double mag = 0.0;
    double growth_viol = 0.0;
    SymTensor2 growth_wit{};
    for (int e = 0; e < mesh.n_triangles(); ++e) {
      const ElementGeometry geo = element_geometry(mesh, e);
      const SymTensor2 du = element_sym_gradient(mesh, u, e);
      const double pc = element_strength(P_nodal, mesh.triangles[e]);
      const double dp = delta_p(du, prm);
      const double dr = delta_reg(du, prm);
      const double tr = std::abs(trace(du));
      bound += geo.area * pc *
               (dp * dp / (2.0 * prm.delta_hi) - 0.5 * tr);
      mag += geo.area * pc * (dp * dp / (2.0 * prm.delta_hi) + 0.5 * tr);

      // Pointwise growth: |sigma| <= (P/sqrt(2))(1 + dp/delta).
      const double sn = norm(sigma(pc, du, prm));
      const double cap = pc / std::numbers::sqrt2 * (1.0 + dp / dr);
      const double gv = (sn - cap) / cap;
      if (gv > growth_viol) {
        growth_viol = gv;
        growth_wit = du;
      }
    }
    const double scale = mag + std::abs(lhs) > 0.0 ? mag + std::abs(lhs) : 1.0;
    const double viol = (bound - lhs) / scale;
    if (viol > rep.worst_violation) {
      rep.worst_violation = viol;
      rep.witness = "field " + std::to_string(i) + " target_dp=" + fmt(target) +
                    " <A(u),u>=" + fmt(lhs) + " bound=" + fmt(bound);
    }
    if (growth_viol > rep.worst_violation) {
      rep.worst_violation = growth_viol;
      rep.witness = "growth bound: field " + std::to_string(i) +
                    " Du=" + fmt(growth_wit);
    }
  }
  rep.pass = rep.worst_violation <= rep.tolerance;
  return rep;
}

PropertyReport scan_drag_monotonicity(long long n_vec, int n_theta,
                                      std::uint64_t seed) {
  if (n_vec < 1 || n_theta < 1)
    throw ConfigError("drag scan: sample counts must be positive");
  Rng rng(seed);
  PropertyReport rep;
  rep.name = "drag_monotonicity";
  rep.tolerance = 1e-12;
  rep.samples = n_vec * n_theta;

  long long oracle_checked = 0;
  double oracle_worst = 0.0;
  const long long oracle_budget = 100000;

  for (int it = 0; it < n_theta; ++it) {
    const double theta =
        n_theta == 1 ? kPi / 4.0
                     : kPi / 4.0 * static_cast<double>(it) /
                           static_cast<double>(n_theta - 1);
    for (long long i = 0; i < n_vec; ++i) {
      const double alpha = rng.log_uniform(1e-2, 1e2);
      const double psi = rng.uniform(0.0, 2.0 * kPi);
      double beta = 0.0;
      double chi = 0.0;
      if (i % 16 == 8) {  // collinear
        beta = alpha * rng.log_uniform(1e-3, 1e3);
        chi = psi;
      } else if (i % 16 == 12) {  // identical pair; the integrand degenerates
        beta = alpha;
        chi = psi;
      } else {
        beta = rng.log_uniform(1e-2, 1e2);
        chi = rng.uniform(0.0, 2.0 * kPi);
      }
      const Vec2 a{alpha * std::cos(psi), alpha * std::sin(psi)};
      const Vec2 b{beta * std::cos(chi), beta * std::sin(chi)};
      const double val = drag_monotone_integrand(a, b, theta);
      const double s = norm(a) + norm(b);
      const double scale = s * s * s;
      const double viol = std::max(0.0, -val) / scale;
      if (viol > rep.worst_violation) {
        rep.worst_violation = viol;
        rep.witness = "theta=" + fmt(theta) + " a=" + fmt(a) + " b=" + fmt(b);
      }

      if (oracle_checked < oracle_budget) {
        ++oracle_checked;
        // Closed polynomial form in the polar data the vectors were built
        // from; disagreement means the vector formula drifted.
        const double phi = chi - psi;
        const double poly =
            std::cos(theta) *
            (alpha * alpha * alpha + beta * beta * beta -
             std::cos(phi) * alpha * beta * (alpha + beta) -
             std::tan(theta) * std::sin(phi) * alpha * beta * (alpha - beta));
        const double dev = std::abs(val - poly) / scale;
        oracle_worst = std::max(oracle_worst, dev);
        if (dev > rep.tolerance && dev > rep.worst_violation) {
          rep.worst_violation = dev;
          rep.witness = "oracle mismatch: theta=" + fmt(theta) +
                        " a=" + fmt(a) + " b=" + fmt(b) + " dev=" + fmt(dev);
        }
        // Rescaled-cubic route; positivity analysis assumes sin(phi) >= 0,
        // which a swap of the pair arranges.
        double ca = alpha, cb = beta, cphi = phi;
        if (std::sin(cphi) < 0.0) {
          std::swap(ca, cb);
          cphi = -cphi;
        }
        if (cb > 0.0) {
          const double pval = rescaled_p(ca / cb, std::cos(cphi), theta);
          const double pred = std::cos(theta) * cb * cb * cb * pval;
          const double pdev = std::abs(val - pred) / scale;
          oracle_worst = std::max(oracle_worst, pdev);
          if (pdev > rep.tolerance && pdev > rep.worst_violation) {
            rep.worst_violation = pdev;
            rep.witness = "cubic form mismatch: theta=" + fmt(theta) +
                          " a=" + fmt(a) + " b=" + fmt(b);
          }
        }
      }
    }
  }

  // Informational probe past the pi/4 threshold; the sign actually survives
  // up to tan(theta)^2 = 8, so no counterexample is expected here. Recorded
  // in the note only.
  const double theta_probe = kPi / 4.0 + 0.3;
  double probe_min = std::numeric_limits<double>::infinity();
  const long long n_probe = 200000;
  for (long long i = 0; i < n_probe; ++i) {
    const double alpha = rng.log_uniform(1e-2, 1e2);
    const double beta = rng.log_uniform(1e-2, 1e2);
    const double psi = rng.uniform(0.0, 2.0 * kPi);
    const double chi = rng.uniform(0.0, 2.0 * kPi);
    const Vec2 a{alpha * std::cos(psi), alpha * std::sin(psi)};
    const Vec2 b{beta * std::cos(chi), beta * std::sin(chi)};
    const double s = norm(a) + norm(b);
    probe_min =
        std::min(probe_min, drag_monotone_integrand(a, b, theta_probe) / (s * s * s));
  }
  rep.note = "oracle max deviation " + fmt(oracle_worst) + " on " +
             std::to_string(oracle_checked) +
             " samples; probe at theta=pi/4+0.3: min normalized integrand " +
             fmt(probe_min) + " over " + std::to_string(n_probe) +
             " samples (sign loss only sets in near tan(theta)^2 = 8)";

  rep.pass = rep.worst_violation <= rep.tolerance;
  return rep;
}

PropertyReport scan_discriminant(double grid_step) {
  if (!(grid_step > 0.0) || grid_step >= 1.0)
    throw ConfigError("discriminant scan: grid step must be in (0, 1)");
  PropertyReport rep;
  rep.name = "drag_discriminant";
  rep.tolerance = 0.0;

  // Exact anchors: every term is integer-valued there, so the comparisons
  // are exact.
  bool anchors_ok = discriminant_d(0.0, 1.0) == -44.0;
  for (double T : {0.25, 0.5, 0.75, 1.0})
    anchors_ok = anchors_ok && discriminant_d(1.0, T) == 0.0;

  double worst = -std::numeric_limits<double>::infinity();
  double wS = 0.0, wT = 0.0;
  long long samples = 5;
  for (double S = -1.0 + grid_step; S < 1.0; S += grid_step) {
    for (double T = grid_step; T < 1.0; T += grid_step) {
      const double d = discriminant_d(S, T);
      ++samples;
      if (d > worst) {
        worst = d;
        wS = S;
        wT = T;
      }
    }
  }
  rep.samples = samples;
  rep.worst_violation = worst;
  rep.witness = "max d at S=" + fmt(wS) + " T=" + fmt(wT);
  if (!anchors_ok) {
    rep.worst_violation = std::max(rep.worst_violation, 1.0);
    rep.note = "exact anchor values d(0,1) = -44, d(1,T) = 0 failed";
  }
  rep.pass = rep.worst_violation <= rep.tolerance;
  return rep;
}

PropertyReport check_contraction(const Problem& pb, const SolverConfig& cfg,
                                 double perturbation_scale, int steps,
                                 ContractionVariant variant,
                                 std::uint64_t seed) {
  if (steps < 1) throw ConfigError("contraction check: steps must be >= 1");
  if (!(perturbation_scale > 0.0))
    throw ConfigError("contraction check: perturbation scale must be > 0");
  pb.validate();

  SolverConfig c = cfg;
  c.t_end = static_cast<double>(steps) * cfg.dt;

  Rng rng(seed);
  Problem p2 = pb;
  DofVector delta_g(pb.mesh);  // forcing offset per unit mass, zero for (a)
  if (variant == ContractionVariant::InitialData) {
    DofVector pert(pb.mesh);
    for (int i = 0; i < pert.size(); ++i) pert[i] = rng.normal();
    const double ms = max_speed(pert);
    if (ms == 0.0) throw ConfigError("contraction check: empty perturbation");
    p2.u0 = pb.u0 + (perturbation_scale / ms) * pert;
  } else {
    const double ang = rng.uniform(0.0, 2.0 * kPi);
    const Vec2 dh = (pb.phys.m * perturbation_scale) *
                    Vec2{std::cos(ang), std::sin(ang)};
    p2.body.f_extra = pb.body.f_extra.shifted(dh);
    for (int v = 0; v < pb.mesh->n_vertices(); ++v)
      delta_g.set_vertex(v, (1.0 / pb.phys.m) * dh);
  }

  PropertyReport rep;
  rep.name = variant == ContractionVariant::InitialData
                 ? "contraction_initial_data"
                 : "contraction_forcing";
  rep.samples = steps;
  rep.tolerance = 10.0 * cfg.picard_tol;

  const SimulationResult r1 = run_simulation(pb, c, 1);
  const SimulationResult r2 = run_simulation(p2, c, 1);
  if (!r1.completed || !r2.completed) {
    rep.worst_violation = 1e300;
    rep.pass = false;
    rep.note = "paired runs did not complete: " +
               (r1.completed ? r2.error : r1.error);
    return rep;
  }
  const std::size_t n_snap = static_cast<std::size_t>(steps) + 1;
  if (r1.snapshots.size() != n_snap || r2.snapshots.size() != n_snap)
    throw SolveError("contraction check: unexpected snapshot count");

  std::vector<double> d(n_snap), traj(n_snap);
  for (std::size_t k = 0; k < n_snap; ++k) {
    d[k] = mass_norm(r1.snapshots[k] - r2.snapshots[k], cfg.time_mass);
    traj[k] = mass_norm(r1.snapshots[k], cfg.time_mass) +
              mass_norm(r2.snapshots[k], cfg.time_mass);
  }
  const double traj_max = *std::max_element(traj.begin(), traj.end());

  if (variant == ContractionVariant::InitialData) {
    const double scale = d[0] + traj_max;
    for (std::size_t k = 1; k < n_snap; ++k) {
      const double viol = (d[k] - d[k - 1]) / scale;
      if (viol > rep.worst_violation) {
        rep.worst_violation = viol;
        rep.witness = "step " + std::to_string(k) + ": |d^n|_M=" + fmt(d[k]) +
                      " > |d^{n-1}|_M=" + fmt(d[k - 1]);
      }
    }
    rep.note = "initial M-norm distance " + fmt(d[0]) + ", final " +
               fmt(d.back());
  } else {
    const double gn = mass_norm(delta_g, cfg.time_mass);
    const double scale = traj_max * traj_max +
                         static_cast<double>(steps) * cfg.dt * gn * gn;
    for (std::size_t k = 1; k < n_snap; ++k) {
      const double lhs = d[k] * d[k];
      const double bound = static_cast<double>(k) * cfg.dt * gn * gn;
      const double viol = (lhs - bound) / scale;
      if (viol > rep.worst_violation) {
        rep.worst_violation = viol;
        rep.witness = "step " + std::to_string(k) + ": |d^n|_M^2=" + fmt(lhs) +
                      " bound=" + fmt(bound);
      }
    }
    rep.note = "|delta_h/m|_M = " + fmt(gn) + ", final M-norm distance " +
               fmt(d.back());
  }
  rep.pass = rep.worst_violation <= rep.tolerance;
  return rep;
}

namespace {

struct QuadPoint {
  double l1, l2, l3, w;
};

// Degree-5 rule, 7 points; weights sum to 1 on the reference triangle.
const QuadPoint kQuad5[7] = {
    {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.225},
    {0.05971587178976982, 0.47014206410511505, 0.47014206410511505,
     0.13239415278850618},
    {0.47014206410511505, 0.05971587178976982, 0.47014206410511505,
     0.13239415278850618},
    {0.47014206410511505, 0.47014206410511505, 0.05971587178976982,
     0.13239415278850618},
    {0.7974269853530873, 0.10128650732345634, 0.10128650732345634,
     0.12593918054482715},
    {0.10128650732345634, 0.7974269853530873, 0.10128650732345634,
     0.12593918054482715},
    {0.10128650732345634, 0.10128650732345634, 0.7974269853530873,
     0.12593918054482715},
};

Vec2 exact_velocity(double A, Vec2 p) {
  const double s = A * std::sin(kPi * p.x) * std::sin(kPi * p.y);
  return {s, s};
}

// Gradient rows of both components coincide for this field.
Vec2 exact_gradient_row(double A, Vec2 p) {
  return {A * kPi * std::cos(kPi * p.x) * std::sin(kPi * p.y),
          A * kPi * std::sin(kPi * p.x) * std::cos(kPi * p.y)};
}

Vec2 exact_load(double A, double strength, const RheologyParams& prm, Vec2 p) {
  const double ss = std::sin(kPi * p.x) * std::sin(kPi * p.y);
  const double cc = std::cos(kPi * p.x) * std::cos(kPi * p.y);
  const double f = strength / (2.0 * prm.delta_lo) * A * kPi * kPi *
                   ((1.0 + prm.lambda) * ss - cc);
  return {f, f};
}

}  // namespace

ConvergenceReport manufactured_convergence(const std::vector<int>& levels,
                                           const RheologyParams& params,
                                           double strength_value,
                                           double amplitude) {
  params.validate();
  if (params.mode != DeltaMode::CutoffBoth)
    throw ConfigError(
        "manufactured solution requires the lower cut-off regime "
        "(CutoffBoth)");
  if (!(strength_value > 0.0))
    throw ConfigError("manufactured solution: strength must be > 0");
  if (levels.empty()) throw ConfigError("manufactured solution: no levels");
  for (int n : levels)
    if (n < 2) throw ConfigError("manufactured solution: level must be >= 2");

  // Peak delta_p of the exact field is A pi sqrt(1 + lambda); the default
  // leaves a factor-2 margin below the lower cut-off.
  const double A = amplitude > 0.0
                       ? amplitude
                       : params.delta_lo /
                             (2.0 * kPi * std::sqrt(1.0 + params.lambda));
  if (A * kPi * std::sqrt(1.0 + params.lambda) > params.delta_lo)
    throw ConfigError(
        "manufactured solution: amplitude leaves the linear regime");

  ConvergenceReport rep;
  rep.levels = levels;

  for (int n : levels) {
    MeshPtr mesh = build_rect_mesh(n, n, 1.0, 1.0);

    Problem pb;
    pb.mesh = mesh;
    pb.rheology = params;
    pb.phys = PhysParams{1.0, 0.0, 9.81};
    pb.ocean = OceanForcing{};  // no drag
    pb.strength.P = NodalScalarSeries::uniform(strength_value);
    pb.strength.P_floor = strength_value;
    std::vector<Vec2> load(static_cast<std::size_t>(mesh->n_vertices()));
    for (int v = 0; v < mesh->n_vertices(); ++v)
      load[static_cast<std::size_t>(v)] =
          exact_load(A, strength_value, params, mesh->vertices[static_cast<std::size_t>(v)]);
    pb.body.f_extra = NodalVectorSeries::from_slices({0.0}, {load});
    pb.u0 = DofVector(mesh);

    SolverConfig cfg;
    cfg.picard_tol = 1e-12;
    cfg.picard_max = 25;
    cfg.linear_rtol = 1e-12;
    const DofVector uh = steady_solve(pb, 0.0, cfg);

    // Interpolant and discrete solution must both sit below the lower
    // cut-off, otherwise the closed-form load is for the wrong operator.
    DofVector interp(mesh);
    for (int v = 0; v < mesh->n_vertices(); ++v)
      interp.set_vertex(
          v, exact_velocity(A, mesh->vertices[static_cast<std::size_t>(v)]));
    for (int e = 0; e < mesh->n_triangles(); ++e) {
      if (delta_p(element_sym_gradient(*mesh, uh, e), params) > params.delta_lo ||
          delta_p(element_sym_gradient(*mesh, interp, e), params) >
              params.delta_lo)
        throw ConfigError(
            "manufactured solution: discrete field left the linear regime");
    }

    double err_h2 = 0.0;
    double err_v2 = 0.0;
    for (int e = 0; e < mesh->n_triangles(); ++e) {
      const ElementGeometry geo = element_geometry(*mesh, e);
      const auto& tri = mesh->triangles[static_cast<std::size_t>(e)];
      const Vec2 p0 = mesh->vertices[static_cast<std::size_t>(tri[0])];
      const Vec2 p1 = mesh->vertices[static_cast<std::size_t>(tri[1])];
      const Vec2 p2 = mesh->vertices[static_cast<std::size_t>(tri[2])];
      const Vec2 u0 = uh.at_vertex(tri[0]);
      const Vec2 u1 = uh.at_vertex(tri[1]);
      const Vec2 u2 = uh.at_vertex(tri[2]);
      // Constant gradient rows of the discrete field.
      const Vec2 gx{geo.grad[0].x * u0.x + geo.grad[1].x * u1.x +
                        geo.grad[2].x * u2.x,
                    geo.grad[0].y * u0.x + geo.grad[1].y * u1.x +
                        geo.grad[2].y * u2.x};
      const Vec2 gy{geo.grad[0].x * u0.y + geo.grad[1].x * u1.y +
                        geo.grad[2].x * u2.y,
                    geo.grad[0].y * u0.y + geo.grad[1].y * u1.y +
                        geo.grad[2].y * u2.y};
      for (const QuadPoint& q : kQuad5) {
        const Vec2 x{q.l1 * p0.x + q.l2 * p1.x + q.l3 * p2.x,
                     q.l1 * p0.y + q.l2 * p1.y + q.l3 * p2.y};
        const Vec2 uq{q.l1 * u0.x + q.l2 * u1.x + q.l3 * u2.x,
                      q.l1 * u0.y + q.l2 * u1.y + q.l3 * u2.y};
        const Vec2 ue = exact_velocity(A, x);
        const Vec2 ge = exact_gradient_row(A, x);
        err_h2 += geo.area * q.w *
                  ((uq.x - ue.x) * (uq.x - ue.x) +
                   (uq.y - ue.y) * (uq.y - ue.y));
        err_v2 += geo.area * q.w *
                  ((gx.x - ge.x) * (gx.x - ge.x) +
                   (gx.y - ge.y) * (gx.y - ge.y) +
                   (gy.x - ge.x) * (gy.x - ge.x) +
                   (gy.y - ge.y) * (gy.y - ge.y));
      }
    }
    rep.errors_h.push_back(std::sqrt(err_h2));
    rep.errors_v.push_back(std::sqrt(err_v2));
  }

  // Least-squares slope of log(err) against log(h), h = 1/n.
  const auto fit_order = [&](const std::vector<double>& errs) {
    const std::size_t m = errs.size();
    if (m < 2) return 0.0;
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      sx += -std::log(static_cast<double>(levels[i]));
      sy += std::log(errs[i]);
    }
    const double mx = sx / static_cast<double>(m);
    const double my = sy / static_cast<double>(m);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double dx = -std::log(static_cast<double>(levels[i])) - mx;
      num += dx * (std::log(errs[i]) - my);
      den += dx * dx;
    }
    return num / den;
  };
  rep.observed_order_h = fit_order(rep.errors_h);
  rep.observed_order_v = fit_order(rep.errors_v);
  return rep;
}

Problem make_property_problem(int n, std::uint64_t seed) {
  Rng rng(seed);
  Problem pb;
  pb.mesh = build_rect_mesh(n, n, 1.0, 1.0);
  pb.rheology = RheologyParams{};
  pb.phys = PhysParams{1.2, 0.3, 9.81};
  pb.ocean.c_ocean = 1.0;
  pb.ocean.theta = 0.6;
  const double ang = rng.uniform(0.0, 2.0 * kPi);
  pb.ocean.U = NodalVectorSeries::uniform(
      Vec2{0.05 * std::cos(ang), 0.05 * std::sin(ang)});
  pb.strength.P = NodalScalarSeries::uniform(2.0);
  pb.strength.P_floor = 1.0;
  pb.u0 = DofVector(pb.mesh);
  pb.validate();
  return pb;
}

Problem make_contraction_problem(int n) {
  Problem pb;
  pb.mesh = build_rect_mesh(n, n, 512e3, 512e3);
  pb.rheology = RheologyParams{};
  pb.phys = PhysParams{1.0, 1.46e-4, 9.81};
  pb.ocean.c_ocean = 5.5;
  pb.ocean.theta = 0.4363323129985824;  // 25 degrees
  pb.ocean.U = NodalVectorSeries::uniform(Vec2{0.1, 0.0});
  pb.strength.P = NodalScalarSeries::uniform(27500.0);
  pb.strength.P_floor = 1.0;
  pb.u0 = DofVector(pb.mesh);
  pb.validate();
  return pb;
}

SolverConfig contraction_config() {
  SolverConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 0.1;
  cfg.picard_tol = 1e-10;
  cfg.picard_max = 60;
  cfg.linear_rtol = 1e-11;
  cfg.linear_method = LinearMethod::SparseDirect;
  cfg.time_mass = MassModel::Lumped;
  return cfg;
}

std::string to_json(const PropertyReport& report) {
  nlohmann::json j;
  j["name"] = report.name;
  j["samples"] = report.samples;
  j["worst_violation"] = report.worst_violation;
  j["tolerance"] = report.tolerance;
  j["pass"] = report.pass;
  j["witness"] = report.witness;
  return j.dump();
}

std::string to_json(const ConvergenceReport& report) {
  nlohmann::json j;
  j["levels"] = report.levels;
  j["errors_h"] = report.errors_h;
  j["errors_v"] = report.errors_v;
  j["observed_order_h"] = report.observed_order_h;
  j["observed_order_v"] = report.observed_order_v;
  return j.dump();
}

}  // namespace icevp::verify
