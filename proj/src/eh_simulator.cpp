#include "macec/eh_simulator.hpp"

#include "parallel.hpp"

#include <atomic>
#include <cmath>
#include <limits>

namespace macec {

namespace {

// Engine-direct uniform in [0, 1): bit-identical across standard
// library implementations, unlike std::uniform_real_distribution.
inline double canonical(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

constexpr double kZ95 = 1.959963984540054;

}  // namespace

HarvestProcess HarvestProcess::uniform(double lo, double hi) {
    if (!(lo >= 0.0) || !(hi >= lo) || !std::isfinite(hi)) {
        throw InvalidParameter("HarvestProcess::uniform: need 0 <= lo <= hi < inf");
    }
    return HarvestProcess(Kind::Uniform, lo, hi);
}

HarvestProcess HarvestProcess::constant(double value) {
    if (!(value >= 0.0) || !std::isfinite(value)) {
        throw InvalidParameter("HarvestProcess::constant: need finite value >= 0");
    }
    return HarvestProcess(Kind::Constant, value, value);
}

HarvestProcess HarvestProcess::bernoulli(double prob, double amount) {
    if (!(prob >= 0.0) || !(prob <= 1.0)) {
        throw InvalidParameter("HarvestProcess::bernoulli: probability outside [0, 1]");
    }
    if (!(amount >= 0.0) || !std::isfinite(amount)) {
        throw InvalidParameter("HarvestProcess::bernoulli: need finite amount >= 0");
    }
    return HarvestProcess(Kind::Bernoulli, prob, amount);
}

double HarvestProcess::mean() const {
    switch (kind_) {
        case Kind::Uniform: return 0.5 * (a_ + b_);
        case Kind::Constant: return a_;
        case Kind::Bernoulli: return a_ * b_;
    }
    return 0.0;
}

double HarvestProcess::variance() const {
    switch (kind_) {
        case Kind::Uniform: {
            const double w = b_ - a_;
            return w * w / 12.0;
        }
        case Kind::Constant: return 0.0;
        case Kind::Bernoulli: return a_ * (1.0 - a_) * b_ * b_;
    }
    return 0.0;
}

HarvestProcess HarvestProcess::scaled(double factor) const {
    if (!(factor >= 0.0) || !std::isfinite(factor)) {
        throw InvalidParameter("HarvestProcess::scaled: need finite factor >= 0");
    }
    switch (kind_) {
        case Kind::Uniform: return uniform(a_ * factor, b_ * factor);
        case Kind::Constant: return constant(a_ * factor);
        case Kind::Bernoulli: return bernoulli(a_, b_ * factor);
    }
    return *this;
}

double HarvestProcess::sample(std::mt19937_64& rng) const {
    switch (kind_) {
        case Kind::Uniform: return a_ + (b_ - a_) * canonical(rng);
        case Kind::Constant: return a_;
        case Kind::Bernoulli: return canonical(rng) < a_ ? b_ : 0.0;
    }
    return 0.0;
}

HarvestTrace generate_trace(const std::vector<HarvestProcess>& processes,
                            std::int64_t slots, std::uint64_t seed) {
    if (processes.empty()) {
        throw InvalidParameter("generate_trace: need at least one process");
    }
    if (slots < 1) {
        throw InvalidParameter("generate_trace: need at least one slot");
    }
    const int users = static_cast<int>(processes.size());
    HarvestTrace trace;
    trace.seed = seed;
    trace.energy.resize(users, slots);
    std::mt19937_64 rng(seed);
    for (int k = 0; k < users; ++k) {
        const HarvestProcess& proc = processes[k];
        for (std::int64_t i = 0; i < slots; ++i) {
            trace.energy(k, i) = proc.sample(rng);
        }
    }
    return trace;
}

Schedule build_schedule(std::int64_t slots, std::int64_t h_slots,
                        const Vec& p_tilde_target, double epsilon) {
    return build_schedule(slots, h_slots, p_tilde_target,
                          Vec::Constant(p_tilde_target.size(), epsilon));
}

Schedule build_schedule(std::int64_t slots, std::int64_t h_slots,
                        const Vec& p_tilde_target, const Vec& epsilon) {
    const int users = static_cast<int>(p_tilde_target.size());
    if (users < 1) throw InvalidParameter("build_schedule: need at least one user");
    if (slots < 1) throw InvalidParameter("build_schedule: need at least one slot");
    if (h_slots < 0 || h_slots >= slots) {
        throw InvalidParameter("build_schedule: saving phase must fit inside the trace");
    }
    if (epsilon.size() != users) {
        throw InvalidParameter("build_schedule: epsilon has wrong size");
    }
    for (int k = 0; k < users; ++k) {
        if (!(p_tilde_target[k] >= 0.0)) {
            throw InvalidParameter("build_schedule: consumed-power targets must be >= 0");
        }
        if (epsilon[k] < 0.0) {
            throw InvalidParameter("build_schedule: epsilon must be >= 0");
        }
        if (epsilon[k] > 0.0 && epsilon[k] >= p_tilde_target[k]) {
            throw InvalidParameter(
                "build_schedule: epsilon must stay below the consumed-power target");
        }
    }

    Schedule sched;
    sched.h_slots = h_slots;
    sched.epsilon = epsilon;
    sched.consumed.resize(users, slots);
    for (int k = 0; k < users; ++k) {
        const double level = p_tilde_target[k] - epsilon[k];
        for (std::int64_t i = 0; i < slots; ++i) {
            sched.consumed(k, i) = i < h_slots ? 0.0 : level;
        }
    }
    return sched;
}

std::vector<std::optional<std::int64_t>> audit_causality(const Mat& energy,
                                                         const Mat& consumed,
                                                         double slot_seconds,
                                                         double tol) {
    if (energy.rows() != consumed.rows() || energy.cols() != consumed.cols()) {
        throw InvalidParameter("audit_causality: shape mismatch");
    }
    if (!(slot_seconds > 0.0)) {
        throw InvalidParameter("audit_causality: slot length must be positive");
    }
    const int users = static_cast<int>(energy.rows());
    const std::int64_t slots = energy.cols();
    std::vector<std::optional<std::int64_t>> first(users);
    for (int k = 0; k < users; ++k) {
        double harvested = 0.0;
        double spent = 0.0;
        for (std::int64_t i = 0; i < slots; ++i) {
            harvested += energy(k, i);
            spent += slot_seconds * consumed(k, i);
            if (spent > harvested + tol) {
                first[k] = i;
                break;
            }
        }
    }
    return first;
}

std::vector<std::optional<std::int64_t>> audit_causality(const HarvestTrace& trace,
                                                         const Schedule& schedule,
                                                         double slot_seconds,
                                                         double tol) {
    return audit_causality(trace.energy, schedule.consumed, slot_seconds, tol);
}

ShortageEstimate estimate_shortage_probability(
    const NormalizedMac& instance, const std::vector<HarvestProcess>& processes,
    std::int64_t slots, std::int64_t h_slots, double epsilon,
    std::int64_t trials, std::uint64_t seed) {
    if (trials < 1) {
        throw InvalidParameter("estimate_shortage_probability: need at least one trial");
    }
    if (static_cast<int>(processes.size()) != instance.users) {
        throw InvalidParameter("estimate_shortage_probability: process count mismatch");
    }
    const Schedule schedule =
        build_schedule(slots, h_slots, instance.p_budget, epsilon);

    std::vector<char> hit(trials, 0);
    detail::parallel_for(trials, [&](std::int64_t t) {
        const HarvestTrace trace =
            generate_trace(processes, slots, seed + static_cast<std::uint64_t>(t));
        const auto audit = audit_causality(trace, schedule, instance.slot_seconds);
        for (const auto& v : audit) {
            if (v.has_value()) {
                hit[t] = 1;
                break;
            }
        }
    });

    ShortageEstimate est;
    est.trials = trials;
    for (std::int64_t t = 0; t < trials; ++t) est.shortages += hit[t];
    const double n = static_cast<double>(trials);
    const double phat = static_cast<double>(est.shortages) / n;
    est.estimate = phat;
    const double z2 = kZ95 * kZ95;
    const double denom = 1.0 + z2 / n;
    const double center = (phat + z2 / (2.0 * n)) / denom;
    const double half =
        kZ95 * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
    est.ci_low = std::max(0.0, center - half);
    est.ci_high = std::min(1.0, center + half);
    return est;
}

SimOutcome run_equivalence_experiment(const NormalizedMac& instance,
                                      const std::vector<HarvestProcess>& processes,
                                      std::int64_t slots, std::uint64_t seed,
                                      const EquivalenceOptions& options) {
    const int users = instance.users;
    if (static_cast<int>(processes.size()) != users) {
        throw InvalidParameter("run_equivalence_experiment: process count mismatch");
    }
    for (int k = 0; k < users; ++k) {
        const double rate = processes[k].mean() / instance.slot_seconds;
        const double tol = 1e-9 * std::max(1.0, std::abs(instance.p_budget[k]));
        if (std::abs(rate - instance.p_budget[k]) > tol) {
            throw InvalidParameter(
                "run_equivalence_experiment: harvest mean does not match the "
                "instance budget for user " + std::to_string(k));
        }
    }

    const std::int64_t h =
        options.h_slots >= 0 ? options.h_slots : (slots + 9999) / 10000;
    if (h >= slots) {
        throw InvalidParameter("run_equivalence_experiment: saving phase swallows the trace");
    }

    Vec mu = options.direction.size() == users ? options.direction : Vec::Ones(users);

    Vec eps(users);
    if (options.mode == EpsilonMode::Fixed) {
        const double floor = options.fixed_epsilon_fraction * instance.p_budget.minCoeff();
        eps.setConstant(floor);
    } else {
        double gamma = options.vanishing_scale /
                       std::sqrt(static_cast<double>(slots - h));
        gamma = std::min(gamma, 0.5);
        eps = gamma * instance.p_budget;
    }

    // Boundary policy at the full budget, then backed off: consumed
    // power drops to p~ - eps and each policy row is rescaled to stay
    // inside the reduced budget. Transmit powers shrink accordingly and
    // recover the boundary point as eps vanishes.
    const BoundarySample boundary = max_weighted_rate(instance, mu);
    const Vec consume_target = instance.p_budget - eps;
    Mat scaled = boundary.policy.delta;
    for (int k = 0; k < users; ++k) {
        const double budget = instance.p_budget[k];
        const double row_scale = budget > 0.0 ? (budget - eps[k]) / budget : 0.0;
        scaled.row(k) *= row_scale;
    }
    CooperationPolicy policy_used;
    policy_used.delta = std::move(scaled);

    const Vec p_run = transmit_powers(consume_target, policy_used,
                                      instance.alpha_eff, instance.slot_seconds);
    const std::vector<int> order = decode_order(mu);
    const Vec run_corner = corner_point(p_run, order);

    const Schedule schedule = build_schedule(slots, h, instance.p_budget, eps);
    const HarvestTrace trace = generate_trace(processes, slots, seed);
    auto audit = audit_causality(trace, schedule, instance.slot_seconds);

    SimOutcome out;
    out.shortage_slots = std::move(audit);
    std::int64_t first_violation = std::numeric_limits<std::int64_t>::max();
    for (const auto& v : out.shortage_slots) {
        if (v.has_value()) {
            out.shortage_occurred = true;
            first_violation = std::min(first_violation, *v);
        }
    }

    out.slots = slots;
    out.h_slots = h;
    out.epsilon = eps;
    out.policy_used = policy_used;
    out.target_rates = boundary.rates;
    out.boundary_weighted = boundary.value;
    out.completed_transmission_slots =
        out.shortage_occurred ? std::max<std::int64_t>(0, first_violation - h)
                              : slots - h;

    const double factor = static_cast<double>(out.completed_transmission_slots) /
                          static_cast<double>(slots);
    out.achieved_rates = factor * run_corner;
    out.achieved_weighted = factor * mu.dot(run_corner);
    out.gap_to_capacity = out.boundary_weighted - out.achieved_weighted;
    return out;
}

}  // namespace macec
