#include "icevp/sampling.hpp"

namespace icevp {

SymTensor2 random_sym_in_band(Rng& rng, const RheologyParams& p,
                              DeltaBand band) {
  SymTensor2 dir;
  double dp = 0.0;
  do {
    dir = {rng.normal(), rng.normal(), rng.normal()};
    dp = delta_p(dir, p);
  } while (dp == 0.0);
  double target = 0.0;
  switch (band) {
    case DeltaBand::Below:
      target = rng.log_uniform(1e-3 * p.delta_lo, p.delta_lo);
      break;
    case DeltaBand::Inside:
      target = rng.log_uniform(p.delta_lo, p.delta_hi);
      break;
    case DeltaBand::Above:
      target = rng.log_uniform(p.delta_hi, 1e3 * p.delta_hi);
      break;
  }
  return (target / dp) * dir;
}

SymTensor2 random_sym_any_band(Rng& rng, const RheologyParams& p) {
  const double pick = rng.uniform();
  const DeltaBand band = pick < 1.0 / 3.0   ? DeltaBand::Below
                         : pick < 2.0 / 3.0 ? DeltaBand::Inside
                                            : DeltaBand::Above;
  return random_sym_in_band(rng, p, band);
}

DofVector random_dof_with_max_deltap(Rng& rng, const MeshPtr& mesh,
                                     const RheologyParams& p,
                                     double target_dp) {
  if (!(target_dp > 0.0))
    throw ConfigError("random field: target delta_p must be positive");
  DofVector u(mesh);
  if (u.size() == 0)
    throw ConfigError("random field: mesh has no interior vertices");
  double max_dp = 0.0;
  while (max_dp == 0.0) {
    for (int i = 0; i < u.size(); ++i) u[i] = rng.normal();
    for (int e = 0; e < mesh->n_triangles(); ++e)
      max_dp = std::max(max_dp, delta_p(element_sym_gradient(*mesh, u, e), p));
  }
  const double s = target_dp / max_dp;
  for (int i = 0; i < u.size(); ++i) u[i] *= s;
  return u;
}

}  // namespace icevp
