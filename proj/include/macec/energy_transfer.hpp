#ifndef MACEC_ENERGY_TRANSFER_HPP
#define MACEC_ENERGY_TRANSFER_HPP

#include "macec/types.hpp"

namespace macec {

/// Per-slot energy transfers: delta(k, j) is the energy user k sends
/// toward user j in one slot (Joules/slot). The diagonal is zero.
struct CooperationPolicy {
    Mat delta;

    CooperationPolicy() = default;
    explicit CooperationPolicy(Mat d);

    static CooperationPolicy zero(int users);

    int users() const { return static_cast<int>(delta.rows()); }
    double sent_by(int k) const { return delta.row(k).sum(); }
    double received_by(int k, const Mat& alpha_eff) const;
};

/// Best achievable end-to-end transfer efficiency between every user
/// pair, allowing relaying through intermediate users. Entry (k, j) is
/// the maximum over simple paths k -> ... -> j of the product of edge
/// efficiencies; zero when no path exists. Shortest-path search on
/// weights -ln(alpha) reduces to a max-product Dijkstra sweep per
/// source, which is what runs here (products accumulated left to right
/// along each path so results match direct path enumeration bit for
/// bit).
///
/// Requires a square matrix with zero diagonal and entries in [0, 1).
Mat effective_efficiencies(const Mat& alpha_direct);

/// Transmit powers implied by consumed powers under a cooperation
/// policy: p_k = p~_k - (1/T) * sum_l (delta_kl - alpha_lk * delta_lk).
/// Throws InfeasiblePolicy if any resulting power is below -1e-12;
/// values in [-1e-12, 0) are clipped to zero.
Vec transmit_powers(const Vec& p_tilde, const CooperationPolicy& policy,
                    const Mat& alpha_eff, double slot_seconds);

/// True iff the policy has nonnegative entries, a zero diagonal, and
/// every row's total sent energy fits the consumed-power budget
/// sum_j delta_kj <= T * p~_k. Constraints are checked with absolute
/// slack `tol`.
bool is_feasible(const CooperationPolicy& policy, const Vec& p_tilde,
                 double slot_seconds, double tol = kFeasibilityTol);

/// Rewrites a feasible policy into an equivalent one where no user both
/// sends and receives energy, without reducing any user's transmit
/// power. Works by net-flow cancellation: an incoming edge l->k and an
/// outgoing edge k->m are shrunk together (keeping p_k fixed) and the
/// displaced flow is rerouted directly as l->m. Requires alpha_eff to
/// be routing-closed (alpha_lm >= alpha_lk * alpha_km), which holds for
/// any matrix produced by effective_efficiencies, before or after
/// channel normalization.
CooperationPolicy reduce_to_half_duplex(const CooperationPolicy& policy,
                                        const Mat& alpha_eff,
                                        const Vec& p_tilde,
                                        double slot_seconds);

}  // namespace macec

#endif
