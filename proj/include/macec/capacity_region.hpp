#ifndef MACEC_CAPACITY_REGION_HPP
#define MACEC_CAPACITY_REGION_HPP

#include "macec/channel_model.hpp"
#include "macec/energy_transfer.hpp"
#include "macec/types.hpp"

#include <vector>

namespace macec {

/// Rate region of a unit-gain Gaussian MAC at fixed transmit powers:
/// sum_{k in S} R_k <= b(S) = 0.5 * ln(1 + sum_{k in S} p_k) for every
/// nonempty subset S. b is normalized, monotone and submodular, so the
/// region is a polymatroid with K! corner points.
struct PolymatroidRegion {
    Vec powers;
    /// bound[mask] for mask in 1..2^K-1; bound[0] = 0 by convention.
    std::vector<double> bounds;

    int users() const { return static_cast<int>(powers.size()); }
    double bound(SubsetMask s) const { return bounds[s]; }
};

PolymatroidRegion region_from_powers(const Vec& powers);

/// Region reachable under a specific cooperation policy; equals
/// region_from_powers(transmit_powers(p~, D)).
PolymatroidRegion region_with_policy(const Vec& p_tilde,
                                     const CooperationPolicy& policy,
                                     const Mat& alpha_eff, double slot_seconds);

/// True iff every subset constraint holds with absolute slack tol.
bool contains(const PolymatroidRegion& region, const Vec& rates, double tol);

/// Corner point of the region for a decode priority: users sorted by
/// decreasing weight are decoded last-to-first, so the heaviest user
/// sees a clean channel. `order` lists user indices from heaviest down.
Vec corner_point(const Vec& powers, const std::vector<int>& order);

/// Stable decreasing sort of user indices by weight (ties keep index order).
std::vector<int> decode_order(const Vec& mu);

/// One supporting point of the energy-cooperation capacity region:
/// the policy attaining max_{D feasible} mu . R over the union of
/// per-policy regions, the corner achieving it, and the value mu . R*.
struct BoundarySample {
    Vec mu;
    Vec rates;                ///< R*, a corner of the region under `policy`
    CooperationPolicy policy; ///< D*, a single fixed policy; no time sharing
    double value = 0.0;       ///< mu . R*
};

/// Maximizes the weighted sum rate over cooperation policies with a
/// pairwise Frank-Wolfe sweep. The linear subproblem decomposes per
/// policy row (spend the whole row budget on the best-gradient link or
/// keep the row idle), and the objective
///   sum_k (mu_(k) - mu_(k+1)) * 0.5 * ln(1 + sum_{j<=k} p_(j)(D))
/// is concave because transmit powers are affine in D. Stops at
/// duality gap < 1e-8 or 10,000 iterations.
BoundarySample max_weighted_rate(const NormalizedMac& instance, const Vec& mu);

/// Sweeps supporting directions over the nonnegative unit sphere
/// (for K = 2: angles evenly spaced in [0, pi/2]) and returns one
/// BoundarySample per direction.
std::vector<BoundarySample> trace_boundary(const NormalizedMac& instance,
                                           int num_directions);

struct SumCapacity {
    double value = 0.0;       ///< nats per channel use
    CooperationPolicy policy;
};

/// max_weighted_rate with all-ones weights.
SumCapacity sum_capacity(const NormalizedMac& instance);

/// Decides whether some feasible policy's region contains `rates`,
/// i.e. membership in the union over all cooperation policies. The
/// certificate policy maximizing the minimum subset slack
/// min_S (b_D(S) - R(S)) is built constructively (the union is convex
/// since every b_D(S) is concave in D) and the sign of the exact
/// minimum slack at that policy is checked at tolerance 1e-6 nats.
bool membership_with_cooperation(const NormalizedMac& instance, const Vec& rates,
                                 double tol = 1e-6);

}  // namespace macec

#endif
