#ifndef MACEC_EH_SIMULATOR_HPP
#define MACEC_EH_SIMULATOR_HPP

#include "macec/capacity_region.hpp"
#include "macec/channel_model.hpp"
#include "macec/energy_transfer.hpp"
#include "macec/types.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace macec {

/// I.i.d. per-slot energy arrival process. The mean is always the
/// analytic mean of the distribution.
class HarvestProcess {
  public:
    enum class Kind { Uniform, Constant, Bernoulli };

    static HarvestProcess uniform(double lo, double hi);
    static HarvestProcess constant(double value);
    static HarvestProcess bernoulli(double prob, double amount);

    Kind kind() const { return kind_; }
    double mean() const;
    double variance() const;
    double param_a() const { return a_; }
    double param_b() const { return b_; }

    /// Same process with all energies multiplied by `factor` (used to
    /// move raw harvests into normalized power units).
    HarvestProcess scaled(double factor) const;

    double sample(std::mt19937_64& rng) const;

  private:
    HarvestProcess(Kind kind, double a, double b) : kind_(kind), a_(a), b_(b) {}
    Kind kind_;
    double a_;
    double b_;
};

/// Realized K x N energy arrivals plus the seed that produced them.
struct HarvestTrace {
    Mat energy;
    std::uint64_t seed = 0;

    int users() const { return static_cast<int>(energy.rows()); }
    std::int64_t slots() const { return energy.cols(); }
};

HarvestTrace generate_trace(const std::vector<HarvestProcess>& processes,
                            std::int64_t slots, std::uint64_t seed);

/// Save-and-transmit consumed-power plan: silent for the first h_slots
/// slots, then constant consumed power p~_k - epsilon_k.
struct Schedule {
    Mat consumed;  ///< K x N consumed-power matrix
    std::int64_t h_slots = 0;
    Vec epsilon;   ///< per-user back-off applied in the transmission phase

    int users() const { return static_cast<int>(consumed.rows()); }
    std::int64_t slots() const { return consumed.cols(); }
};

Schedule build_schedule(std::int64_t slots, std::int64_t h_slots,
                        const Vec& p_tilde_target, double epsilon);
Schedule build_schedule(std::int64_t slots, std::int64_t h_slots,
                        const Vec& p_tilde_target, const Vec& epsilon);

/// First slot (0-based) where a user's cumulative consumed energy
/// exceeds its cumulative harvested energy by more than `tol`, per
/// user; nullopt means the energy-causality constraint held throughout.
std::vector<std::optional<std::int64_t>> audit_causality(const Mat& energy,
                                                         const Mat& consumed,
                                                         double slot_seconds,
                                                         double tol = 1e-9);
std::vector<std::optional<std::int64_t>> audit_causality(const HarvestTrace& trace,
                                                         const Schedule& schedule,
                                                         double slot_seconds,
                                                         double tol = 1e-9);

struct ShortageEstimate {
    double estimate = 0.0;
    double ci_low = 0.0;   ///< Wilson 95% interval
    double ci_high = 0.0;
    std::int64_t trials = 0;
    std::int64_t shortages = 0;
};

/// Monte-Carlo probability that any user hits an energy shortage under
/// the save-and-transmit schedule (consumed power covers transmission
/// and cooperation together). Trials run independently; trial t uses
/// seed + t.
ShortageEstimate estimate_shortage_probability(
    const NormalizedMac& instance, const std::vector<HarvestProcess>& processes,
    std::int64_t slots, std::int64_t h_slots, double epsilon,
    std::int64_t trials, std::uint64_t seed);

enum class EpsilonMode { Vanishing, Fixed };

struct EquivalenceOptions {
    /// Saving-phase length; negative means ceil(N / 10000).
    std::int64_t h_slots = -1;
    EpsilonMode mode = EpsilonMode::Vanishing;
    /// Fixed mode: epsilon = fraction * min_k p~_k for every user.
    double fixed_epsilon_fraction = 0.05;
    /// Vanishing mode: epsilon_k = scale / sqrt(N - h) * p~_k, capped
    /// at half the budget.
    double vanishing_scale = 14.0;
    /// Boundary direction to target; empty means all-ones (sum rate).
    Vec direction;
};

struct SimOutcome {
    std::vector<std::optional<std::int64_t>> shortage_slots;
    bool shortage_occurred = false;
    Vec achieved_rates;              ///< per-user rates after the (N-h)/N penalty
    double achieved_weighted = 0.0;  ///< mu . achieved_rates
    double gap_to_capacity = 0.0;    ///< mu . (boundary - achieved), nats

    Vec target_rates;                ///< boundary corner at the full budget
    double boundary_weighted = 0.0;  ///< mu . target_rates (analytic value)
    CooperationPolicy policy_used;   ///< back-off-scaled policy that ran
    Vec epsilon;
    std::int64_t h_slots = 0;
    std::int64_t slots = 0;
    std::int64_t completed_transmission_slots = 0;
};

/// One save-and-transmit run against the analytic boundary point in
/// `direction`: picks the boundary policy, backs consumed power off by
/// epsilon (scaling the policy rows to keep it feasible), audits energy
/// causality including cooperation energy, and reports the achieved
/// rates. On shortage the run aborts at the violation slot and the
/// rate scales by the fraction of completed transmission slots.
/// Requires process means to match the instance budgets (mean / T =
/// p_budget).
///
/// Rates are nats per channel use with one channel use per slot; a
/// multi-symbol slot would scale codeword length and message size by
/// the same factor and cancel out of every rate here.
SimOutcome run_equivalence_experiment(const NormalizedMac& instance,
                                      const std::vector<HarvestProcess>& processes,
                                      std::int64_t slots, std::uint64_t seed,
                                      const EquivalenceOptions& options = {});

}  // namespace macec

#endif
