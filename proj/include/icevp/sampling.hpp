#pragma once

#include "icevp/mesh.hpp"
#include "icevp/random.hpp"
#include "icevp/rheology.hpp"

namespace icevp {

// Cut-off branches of delta_p relative to [delta_lo, delta_hi].
enum class DeltaBand { Below, Inside, Above };

// Gaussian direction rescaled so delta_p lands log-uniformly inside the
// requested band (Below reaches down to 1e-3 delta_lo, Above up to
// 1e3 delta_hi).
SymTensor2 random_sym_in_band(Rng& rng, const RheologyParams& p,
                              DeltaBand band);

// Band picked uniformly at random.
SymTensor2 random_sym_any_band(Rng& rng, const RheologyParams& p);

// Gaussian nodal field rescaled so the maximum element delta_p(Du) equals
// target_dp.
DofVector random_dof_with_max_deltap(Rng& rng, const MeshPtr& mesh,
                                     const RheologyParams& p,
                                     double target_dp);

}  // namespace icevp
