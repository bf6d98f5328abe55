#include "macec/capacity_region.hpp"

#include "parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

namespace macec {

namespace {

constexpr double kFwGapTol = 1e-8;
constexpr int kFwMaxIter = 10000;

void check_users(int users) {
    if (users < 1) throw InvalidParameter("need at least one user");
    if (users > kMaxUsers) {
        throw SizeLimit("subset enumeration supports at most 16 users");
    }
}

/// Weighted support-function objective for a fixed direction mu.
/// Users are pre-sorted by decreasing weight; coeff[i] is the marginal
/// weight (mu_(i) - mu_(i+1)) / 2, nonnegative by construction.
struct WeightedObjective {
    Vec p_tilde;
    Mat alpha;
    double slot;
    std::vector<int> order;
    std::vector<double> coeff;

    int users() const { return static_cast<int>(p_tilde.size()); }

    Vec powers_at(const Mat& d) const {
        const int k = users();
        Vec p(k);
        for (int i = 0; i < k; ++i) {
            double out = 0.0;
            double in = 0.0;
            for (int j = 0; j < k; ++j) {
                out += d(i, j);
                in += alpha(j, i) * d(j, i);
            }
            p[i] = p_tilde[i] - (out - in) / slot;
        }
        return p;
    }

    double value(const Mat& d) const {
        const Vec p = powers_at(d);
        double f = 0.0;
        double prefix = 0.0;
        for (size_t i = 0; i < order.size(); ++i) {
            prefix += std::max(p[order[i]], 0.0);
            f += coeff[i] * std::log1p(prefix);
        }
        return f;
    }

    /// Gradient with respect to the policy matrix (diagonal forced 0).
    Mat gradient(const Mat& d) const {
        const int k = users();
        const Vec p = powers_at(d);
        // d f / d p_c = sum over sorted positions at or after c's of
        // coeff_i / (1 + prefix_i); accumulate the tail right-to-left.
        std::vector<double> prefix(k);
        double acc = 0.0;
        for (int i = 0; i < k; ++i) {
            acc += std::max(p[order[i]], 0.0);
            prefix[i] = acc;
        }
        Vec g_user(k);
        double tail = 0.0;
        for (int i = k - 1; i >= 0; --i) {
            tail += coeff[i] / (1.0 + prefix[i]);
            g_user[order[i]] = tail;
        }
        Mat g = Mat::Zero(k, k);
        for (int a = 0; a < k; ++a) {
            for (int b = 0; b < k; ++b) {
                if (a != b) g(a, b) = (-g_user[a] + alpha(a, b) * g_user[b]) / slot;
            }
        }
        return g;
    }
};

double frob_dot(const Mat& a, const Mat& b) {
    return (a.array() * b.array()).sum();
}

/// Vertex of the feasible polytope: per row, either idle or the whole
/// budget T * p~_k on one link. Encoded as one choice per row
/// (-1 = idle, otherwise target column).
using VertexKey = std::vector<int>;

Mat vertex_matrix(const VertexKey& key, const Vec& p_tilde, double slot) {
    const int k = static_cast<int>(key.size());
    Mat v = Mat::Zero(k, k);
    for (int a = 0; a < k; ++a) {
        if (key[a] >= 0) v(a, key[a]) = slot * p_tilde[a];
    }
    return v;
}

/// Linear subproblem: maximize <grad, V> over the polytope, solved
/// greedily per row.
VertexKey linear_maximizer(const Mat& grad, const Vec& p_tilde) {
    const int k = static_cast<int>(grad.rows());
    VertexKey key(k, -1);
    for (int a = 0; a < k; ++a) {
        if (p_tilde[a] <= 0.0) continue;
        int best = -1;
        double best_val = 0.0;
        for (int b = 0; b < k; ++b) {
            if (b != a && grad(a, b) > best_val) {
                best_val = grad(a, b);
                best = b;
            }
        }
        key[a] = best;
    }
    return key;
}

/// Exact line search for a concave 1-D slice: bisects on the sign of
/// the directional derivative.
double line_search(const WeightedObjective& obj, const Mat& x, const Mat& dir,
                   double gamma_max) {
    auto slope = [&](double g) { return frob_dot(obj.gradient(x + g * dir), dir); };
    if (slope(gamma_max) >= 0.0) return gamma_max;
    double lo = 0.0;
    double hi = gamma_max;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (slope(mid) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

struct FwResult {
    Mat policy;
    double gap = std::numeric_limits<double>::infinity();
    int iterations = 0;
};

/// Away-step Frank-Wolfe over the row-budget polytope, starting from
/// the all-idle policy so the objective never falls below the
/// no-cooperation value.
FwResult frank_wolfe(const WeightedObjective& obj) {
    const int k = obj.users();
    std::map<VertexKey, double> weight;
    const VertexKey idle(k, -1);
    weight[idle] = 1.0;
    Mat x = Mat::Zero(k, k);

    FwResult res;
    for (res.iterations = 0; res.iterations < kFwMaxIter; ++res.iterations) {
        const Mat grad = obj.gradient(x);

        const VertexKey fw_key = linear_maximizer(grad, obj.p_tilde);
        const Mat fw_v = vertex_matrix(fw_key, obj.p_tilde, obj.slot);
        const Mat d_fw = fw_v - x;
        const double gap_fw = frob_dot(grad, d_fw);
        res.gap = gap_fw;
        if (gap_fw < kFwGapTol) break;

        // Away vertex: active atom with the worst gradient alignment.
        auto away_it = weight.begin();
        double away_score = std::numeric_limits<double>::infinity();
        for (auto it = weight.begin(); it != weight.end(); ++it) {
            const double s = frob_dot(grad, vertex_matrix(it->first, obj.p_tilde, obj.slot));
            if (s < away_score) {
                away_score = s;
                away_it = it;
            }
        }
        const Mat away_v = vertex_matrix(away_it->first, obj.p_tilde, obj.slot);
        const double gap_aw = frob_dot(grad, x - away_v);

        Mat dir;
        double gamma_max;
        bool is_fw_step;
        if (gap_fw >= gap_aw || weight.size() == 1) {
            dir = d_fw;
            gamma_max = 1.0;
            is_fw_step = true;
        } else {
            dir = x - away_v;
            const double w = away_it->second;
            gamma_max = (w >= 1.0) ? 1.0 : w / (1.0 - w);
            is_fw_step = false;
        }
        if (gamma_max <= 0.0) break;

        const double gamma = line_search(obj, x, dir, gamma_max);
        if (gamma <= 0.0) break;

        if (is_fw_step) {
            for (auto& [key, w] : weight) w *= (1.0 - gamma);
            weight[fw_key] += gamma;
        } else {
            for (auto& [key, w] : weight) w *= (1.0 + gamma);
            weight[away_it->first] -= gamma;
        }
        for (auto it = weight.begin(); it != weight.end();) {
            if (it->second <= 1e-15) {
                it = weight.erase(it);
            } else {
                ++it;
            }
        }

        // Rebuild the iterate from its atoms periodically so weight
        // updates cannot drift away from the represented point.
        if ((res.iterations & 63) == 63) {
            double total = 0.0;
            for (const auto& [key, w] : weight) total += w;
            x.setZero();
            for (auto& [key, w] : weight) {
                w /= total;
                x += w * vertex_matrix(key, obj.p_tilde, obj.slot);
            }
        } else {
            x += gamma * dir;
        }
    }

    res.policy = std::move(x);
    // Snap feasibility rounding: tiny negatives to zero, diagonal to zero.
    for (int a = 0; a < k; ++a) {
        for (int b = 0; b < k; ++b) {
            if (a == b || res.policy(a, b) < 0.0) res.policy(a, b) = 0.0;
        }
    }
    return res;
}

WeightedObjective make_objective(const NormalizedMac& inst, const Vec& mu) {
    if (mu.size() != inst.users) {
        throw InvalidParameter("max_weighted_rate: weight vector has wrong size");
    }
    bool any_positive = false;
    for (int i = 0; i < mu.size(); ++i) {
        if (mu[i] < 0.0) {
            throw InvalidParameter("max_weighted_rate: weights must be >= 0");
        }
        if (mu[i] > 0.0) any_positive = true;
    }
    if (!any_positive) {
        throw InvalidParameter("max_weighted_rate: weights must not be all zero");
    }

    WeightedObjective obj;
    obj.p_tilde = inst.p_budget;
    obj.alpha = inst.alpha_eff;
    obj.slot = inst.slot_seconds;
    obj.order = decode_order(mu);
    const int k = inst.users;
    obj.coeff.resize(k);
    for (int i = 0; i < k; ++i) {
        const double next = (i + 1 < k) ? mu[obj.order[i + 1]] : 0.0;
        obj.coeff[i] = 0.5 * (mu[obj.order[i]] - next);
    }
    return obj;
}

}  // namespace

PolymatroidRegion region_from_powers(const Vec& powers) {
    const int k = static_cast<int>(powers.size());
    check_users(k);
    for (int i = 0; i < k; ++i) {
        if (powers[i] < 0.0) {
            throw InvalidParameter("region_from_powers: powers must be >= 0");
        }
    }
    PolymatroidRegion region;
    region.powers = powers;
    const SubsetMask total = SubsetMask{1} << k;
    region.bounds.assign(total, 0.0);
    std::vector<double> psum(total, 0.0);
    for (SubsetMask s = 1; s < total; ++s) {
        const SubsetMask low = s & (~s + 1);
        const int idx = std::countr_zero(low);
        psum[s] = psum[s ^ low] + powers[idx];
        region.bounds[s] = 0.5 * std::log1p(psum[s]);
    }
    return region;
}

PolymatroidRegion region_with_policy(const Vec& p_tilde,
                                     const CooperationPolicy& policy,
                                     const Mat& alpha_eff, double slot_seconds) {
    if (!is_feasible(policy, p_tilde, slot_seconds)) {
        throw InfeasiblePolicy("region_with_policy: policy violates the row budget");
    }
    return region_from_powers(transmit_powers(p_tilde, policy, alpha_eff, slot_seconds));
}

bool contains(const PolymatroidRegion& region, const Vec& rates, double tol) {
    const int k = region.users();
    if (rates.size() != k) {
        throw InvalidParameter("contains: rate vector has wrong size");
    }
    const SubsetMask total = SubsetMask{1} << k;
    std::vector<double> rsum(total, 0.0);
    for (SubsetMask s = 1; s < total; ++s) {
        const SubsetMask low = s & (~s + 1);
        const int idx = std::countr_zero(low);
        rsum[s] = rsum[s ^ low] + rates[idx];
        if (rsum[s] > region.bounds[s] + tol) return false;
    }
    return true;
}

std::vector<int> decode_order(const Vec& mu) {
    std::vector<int> order(mu.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return mu[a] > mu[b]; });
    return order;
}

Vec corner_point(const Vec& powers, const std::vector<int>& order) {
    const int k = static_cast<int>(powers.size());
    if (static_cast<int>(order.size()) != k) {
        throw InvalidParameter("corner_point: order has wrong size");
    }
    Vec rates = Vec::Zero(k);
    double prefix = 0.0;
    for (int i = 0; i < k; ++i) {
        const double p = std::max(powers[order[i]], 0.0);
        rates[order[i]] = 0.5 * std::log1p(p / (1.0 + prefix));
        prefix += p;
    }
    return rates;
}

BoundarySample max_weighted_rate(const NormalizedMac& instance, const Vec& mu) {
    const WeightedObjective obj = make_objective(instance, mu);
    const FwResult fw = frank_wolfe(obj);

    BoundarySample sample;
    sample.mu = mu;
    sample.policy.delta = fw.policy;
    const Vec p = transmit_powers(instance.p_budget, sample.policy,
                                  instance.alpha_eff, instance.slot_seconds);
    sample.rates = corner_point(p, obj.order);
    sample.value = mu.dot(sample.rates);
    return sample;
}

std::vector<BoundarySample> trace_boundary(const NormalizedMac& instance,
                                           int num_directions) {
    if (num_directions < 2) {
        throw InvalidParameter("trace_boundary: need at least two directions");
    }
    const int k = instance.users;
    std::vector<Vec> dirs;
    dirs.reserve(num_directions);
    if (k == 1) {
        dirs.assign(num_directions, Vec::Ones(1));
    } else if (k == 2) {
        for (int i = 0; i < num_directions; ++i) {
            const double theta = (std::numbers::pi_v<double> / 2.0) *
                                 static_cast<double>(i) / (num_directions - 1);
            Vec mu(2);
            mu[0] = std::cos(theta);
            mu[1] = std::sin(theta);
            for (int c = 0; c < 2; ++c) {
                if (std::abs(mu[c]) < 1e-15) mu[c] = 0.0;
            }
            dirs.push_back(mu);
        }
    } else {
        // No canonical sweep past two users: deterministic pseudo-random
        // directions on the nonnegative unit sphere.
        std::mt19937_64 rng(0x6d616365637472ULL);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (int i = 0; i < num_directions; ++i) {
            Vec mu(k);
            double norm = 0.0;
            for (int c = 0; c < k; ++c) {
                mu[c] = std::abs(gauss(rng));
                norm += mu[c] * mu[c];
            }
            norm = std::sqrt(norm);
            if (norm <= 0.0) {
                mu.setOnes();
                norm = std::sqrt(static_cast<double>(k));
            }
            dirs.push_back(mu / norm);
        }
    }

    // Directions are independent; results land by index so the thread
    // split cannot affect the output.
    std::vector<BoundarySample> samples(dirs.size());
    detail::parallel_for(static_cast<std::int64_t>(dirs.size()), [&](std::int64_t i) {
        samples[i] = max_weighted_rate(instance, dirs[i]);
    });
    return samples;
}

SumCapacity sum_capacity(const NormalizedMac& instance) {
    const BoundarySample sample = max_weighted_rate(instance, Vec::Ones(instance.users));
    SumCapacity out;
    out.value = sample.value;
    out.policy = sample.policy;
    return out;
}

namespace {

/// Minimum subset slack min_S (b_D(S) - R(S)) evaluated exactly at one
/// policy.
double min_slack_at(const NormalizedMac& inst, const CooperationPolicy& policy,
                    const Vec& rates) {
    const Vec p = transmit_powers(inst.p_budget, policy, inst.alpha_eff,
                                  inst.slot_seconds);
    const int k = inst.users;
    const SubsetMask total = SubsetMask{1} << k;
    std::vector<double> psum(total, 0.0);
    std::vector<double> rsum(total, 0.0);
    double worst = std::numeric_limits<double>::infinity();
    for (SubsetMask s = 1; s < total; ++s) {
        const SubsetMask low = s & (~s + 1);
        const int idx = std::countr_zero(low);
        psum[s] = psum[s ^ low] + p[idx];
        rsum[s] = rsum[s ^ low] + rates[idx];
        worst = std::min(worst, 0.5 * std::log1p(psum[s]) - rsum[s]);
    }
    return worst;
}

/// Wolfe's min-norm-point algorithm: exact projection of `target` onto
/// the convex hull of `points`, returning hull weights. Finite
/// termination makes the outer membership loop converge quickly, which
/// a step-capped first-order inner solver does not.
Vec min_norm_weights(const std::vector<Vec>& points, const Vec& target) {
    const int n = static_cast<int>(points.size());
    const int dim = static_cast<int>(target.size());
    std::vector<Vec> q(points.size());
    for (int i = 0; i < n; ++i) q[i] = points[i] - target;

    int start = 0;
    for (int i = 1; i < n; ++i) {
        if (q[i].squaredNorm() < q[start].squaredNorm()) start = i;
    }
    std::vector<int> active = {start};
    Vec w = Vec::Ones(1);

    auto current = [&]() {
        Vec y = Vec::Zero(dim);
        for (std::size_t i = 0; i < active.size(); ++i) y += w[i] * q[active[i]];
        return y;
    };

    for (int major = 0; major < 4 * n + 16; ++major) {
        const Vec y = current();
        const double yy = y.squaredNorm();
        int best = -1;
        double best_dot = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
            const double d = q[i].dot(y);
            if (d < best_dot) {
                best_dot = d;
                best = i;
            }
        }
        if (best < 0 || best_dot >= yy - 1e-18 - 1e-12 * yy) break;
        if (std::find(active.begin(), active.end(), best) != active.end()) break;
        active.push_back(best);
        Vec w_ext(active.size());
        w_ext.head(active.size() - 1) = w;
        w_ext[active.size() - 1] = 0.0;
        w = w_ext;

        for (int minor = 0; minor < 4 * n + 16; ++minor) {
            // Affine minimizer over the active set via the bordered
            // normal equations.
            const int m = static_cast<int>(active.size());
            Mat sys = Mat::Zero(m + 1, m + 1);
            for (int i = 0; i < m; ++i) {
                for (int j = 0; j < m; ++j) sys(i, j) = q[active[i]].dot(q[active[j]]);
                sys(i, m) = 1.0;
                sys(m, i) = 1.0;
            }
            Vec rhs = Vec::Zero(m + 1);
            rhs[m] = 1.0;
            const Vec sol = sys.fullPivLu().solve(rhs);
            const Vec v = sol.head(m);
            if (!v.allFinite()) break;

            if (v.minCoeff() > 1e-12) {
                w = v;
                break;
            }
            // Walk toward v until the first weight hits zero, then drop
            // that point from the active set.
            double theta = 1.0;
            for (int i = 0; i < m; ++i) {
                if (v[i] <= 1e-12 && w[i] > v[i]) {
                    theta = std::min(theta, w[i] / (w[i] - v[i]));
                }
            }
            w = (1.0 - theta) * w + theta * v;
            int drop = -1;
            double smallest = 1e-11;
            for (int i = 0; i < m; ++i) {
                if (w[i] < smallest) {
                    smallest = w[i];
                    drop = i;
                }
            }
            if (drop < 0) break;
            active.erase(active.begin() + drop);
            Vec w_next(active.size());
            for (int i = 0, j = 0; i < m; ++i) {
                if (i != drop) w_next[j++] = w[i];
            }
            const double total = w_next.sum();
            w = total > 0.0 ? Vec(w_next / total) : Vec::Ones(active.size()) /
                                                        double(active.size());
        }
    }

    Vec full = Vec::Zero(n);
    for (std::size_t i = 0; i < active.size(); ++i) {
        full[active[i]] = std::max(0.0, w[i]);
    }
    const double total = full.sum();
    if (total > 0.0) full /= total;
    return full;
}

}  // namespace

bool membership_with_cooperation(const NormalizedMac& instance, const Vec& rates,
                                 double tol) {
    const int k = instance.users;
    if (rates.size() != k) {
        throw InvalidParameter("membership_with_cooperation: shape mismatch");
    }
    for (int i = 0; i < k; ++i) {
        if (rates[i] < 0.0) return false;  // region lies in the positive quadrant
    }

    // Constructive decision: the union over feasible policies is convex
    // (each subset bound is concave in the policy), so project `rates`
    // onto it with supporting points from max_weighted_rate. Collected
    // atoms (R_i, D_i) combine into a single certificate policy
    // D = sum_i lambda_i D_i whose exact minimum slack decides the sign.
    std::vector<Vec> atom_rates;
    std::vector<Mat> atom_policies;
    Vec lambda;

    auto slack_of_combination = [&]() {
        Mat d = Mat::Zero(k, k);
        for (int i = 0; i < lambda.size(); ++i) {
            if (lambda[i] > 0.0) d += lambda[i] * atom_policies[i];
        }
        for (int a = 0; a < k; ++a) {
            for (int b = 0; b < k; ++b) {
                if (a == b || d(a, b) < 0.0) d(a, b) = 0.0;
            }
        }
        CooperationPolicy p;
        p.delta = std::move(d);
        return min_slack_at(instance, p, rates);
    };

    if (rates.maxCoeff() <= 0.0) return true;  // origin is always inside

    Vec x = Vec::Zero(k);
    const double scale = std::max(1.0, rates.norm());
    bool converged = false;
    for (int outer = 0; outer < 200 && !converged; ++outer) {
        const Vec c = rates - x;
        const double cn = c.norm();
        if (cn <= 1e-10 * scale) break;

        Vec mu = c.cwiseMax(0.0);
        if (mu.maxCoeff() <= 0.0) break;  // rates <= x: inside by down-closedness
        const BoundarySample s = max_weighted_rate(instance, mu);
        // Support point in direction c: clamp coordinates with c < 0 to
        // zero (allowed, the region is down-closed).
        Vec atom = s.rates;
        for (int i = 0; i < k; ++i) {
            if (c[i] <= 0.0) atom[i] = 0.0;
        }
        // The support value carries the boundary solver's duality-gap
        // tolerance, so a certified separation needs margin beyond it.
        const double margin = c.dot(rates) - c.dot(atom);
        if (margin > 1e-7 * scale + tol * cn) {
            return false;
        }
        // Projection of `rates` onto conv(atoms) cannot improve further
        // once the support step adds nothing.
        if (c.dot(atom) - c.dot(x) <= 1e-15 * scale * scale) converged = true;

        atom_rates.push_back(atom);
        atom_policies.push_back(s.policy.delta);
        lambda = min_norm_weights(atom_rates, rates);
        x.setZero();
        for (int i = 0; i < lambda.size(); ++i) x += lambda[i] * atom_rates[i];
    }

    if (lambda.size() > 0 && slack_of_combination() >= -tol) return true;

    // Last resort: the residual direction approximates the supporting
    // normal at `rates`, whose boundary policy is the natural witness.
    const Vec c = (rates - x).cwiseMax(0.0);
    const Vec mu = c.maxCoeff() > 0.0 ? c : Vec::Ones(k);
    const BoundarySample witness = max_weighted_rate(instance, mu);
    return min_slack_at(instance, witness.policy, rates) >= -tol;
}

}  // namespace macec
