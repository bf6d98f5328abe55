#ifndef MACEC_CHANNEL_MODEL_HPP
#define MACEC_CHANNEL_MODEL_HPP

#include "macec/types.hpp"

namespace macec {

/// Raw description of a K-user Gaussian multiple-access channel with
/// wireless energy transfer links between users.
struct RawMacParams {
    Vec gains;          ///< h_k, dimensionless channel gains (> 0)
    double noise_var;   ///< receiver noise variance (Watts, > 0)
    double slot_seconds;///< slot length T (seconds, > 0)
    Mat alpha_direct;   ///< direct transfer efficiencies, [0,1), zero diagonal
    Vec harvest_rate;   ///< mean harvested energy per slot (Joules, >= 0)

    int users() const { return static_cast<int>(gains.size()); }

    /// Throws InvalidParameter on the first violated constraint.
    void validate() const;
};

/// The equivalent unit-gain / unit-noise instance every other module
/// operates on. Transfer efficiencies are routed (relaying allowed) and
/// rescaled; entries may exceed one after rescaling, which is an
/// artifact of the power units and not actual amplification.
struct NormalizedMac {
    int users = 0;
    Vec p_budget;       ///< consumed-power budgets, normalized units
    Mat alpha_eff;      ///< routed + rescaled transfer efficiencies
    double slot_seconds = 1.0;

    NormalizedMac() = default;
    NormalizedMac(Vec budget, Mat alpha, double slot);
};

/// Rescales powers by h_k / sigma^2 and transfer efficiencies by
/// h_j / h_k so that every user's SNR, and hence the capacity region,
/// is unchanged while gains and noise become one. Routing over relay
/// paths is applied to alpha before rescaling.
NormalizedMac normalize(const RawMacParams& raw);

/// Inverse of the power scaling: maps a normalized consumed power back
/// to raw units (recovers harvest_rate / T for the budget vector).
Vec denormalize_powers(const RawMacParams& raw, const Vec& normalized_p);

}  // namespace macec

#endif
