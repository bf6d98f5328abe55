#include "macec/energy_transfer.hpp"

#include <algorithm>
#include <vector>

namespace macec {

namespace {

void require_square(const Mat& m, const char* what) {
    if (m.rows() != m.cols()) {
        throw InvalidParameter(std::string(what) + ": matrix must be square");
    }
}

}  // namespace

CooperationPolicy::CooperationPolicy(Mat d) : delta(std::move(d)) {
    require_square(delta, "CooperationPolicy");
    const int k = users();
    for (int i = 0; i < k; ++i) {
        if (delta(i, i) != 0.0) {
            throw InvalidParameter("CooperationPolicy: diagonal must be zero");
        }
        for (int j = 0; j < k; ++j) {
            if (delta(i, j) < 0.0) {
                throw InvalidParameter("CooperationPolicy: negative transfer");
            }
        }
    }
}

CooperationPolicy CooperationPolicy::zero(int users) {
    CooperationPolicy p;
    p.delta = Mat::Zero(users, users);
    return p;
}

double CooperationPolicy::received_by(int k, const Mat& alpha_eff) const {
    double in = 0.0;
    for (int l = 0; l < users(); ++l) {
        in += alpha_eff(l, k) * delta(l, k);
    }
    return in;
}

Mat effective_efficiencies(const Mat& alpha_direct) {
    require_square(alpha_direct, "effective_efficiencies");
    const int k = static_cast<int>(alpha_direct.rows());
    for (int i = 0; i < k; ++i) {
        if (alpha_direct(i, i) != 0.0) {
            throw InvalidParameter("effective_efficiencies: diagonal must be zero");
        }
        for (int j = 0; j < k; ++j) {
            if (alpha_direct(i, j) < 0.0 || alpha_direct(i, j) >= 1.0) {
                throw InvalidParameter(
                    "effective_efficiencies: entries must lie in [0, 1)");
            }
        }
    }

    // Max-product Dijkstra from each source. Every factor is < 1 so
    // extending a path can only shrink its product; settling nodes in
    // decreasing reachability order is optimal.
    Mat eff = Mat::Zero(k, k);
    std::vector<double> best(k);
    std::vector<bool> settled(k);
    for (int src = 0; src < k; ++src) {
        std::fill(best.begin(), best.end(), 0.0);
        std::fill(settled.begin(), settled.end(), false);
        best[src] = 1.0;
        for (int round = 0; round < k; ++round) {
            int u = -1;
            double u_best = 0.0;
            for (int v = 0; v < k; ++v) {
                if (!settled[v] && best[v] > u_best) {
                    u_best = best[v];
                    u = v;
                }
            }
            if (u < 0) break;
            settled[u] = true;
            for (int v = 0; v < k; ++v) {
                if (settled[v] || alpha_direct(u, v) <= 0.0) continue;
                const double via = best[u] * alpha_direct(u, v);
                if (via > best[v]) best[v] = via;
            }
        }
        for (int dst = 0; dst < k; ++dst) {
            if (dst != src) eff(src, dst) = best[dst];
        }
    }
    return eff;
}

Vec transmit_powers(const Vec& p_tilde, const CooperationPolicy& policy,
                    const Mat& alpha_eff, double slot_seconds) {
    const int k = static_cast<int>(p_tilde.size());
    if (policy.users() != k || alpha_eff.rows() != k || alpha_eff.cols() != k) {
        throw InvalidParameter("transmit_powers: shape mismatch");
    }
    if (slot_seconds <= 0.0) {
        throw InvalidParameter("transmit_powers: slot length must be positive");
    }
    Vec p(k);
    for (int i = 0; i < k; ++i) {
        const double out = policy.sent_by(i);
        const double in = policy.received_by(i, alpha_eff);
        p[i] = p_tilde[i] - (out - in) / slot_seconds;
        if (p[i] < -1e-12) {
            throw InfeasiblePolicy("transmit_powers: policy drives user " +
                                   std::to_string(i) + " power negative");
        }
        p[i] = std::max(p[i], 0.0);
    }
    return p;
}

bool is_feasible(const CooperationPolicy& policy, const Vec& p_tilde,
                 double slot_seconds, double tol) {
    const int k = static_cast<int>(p_tilde.size());
    if (policy.users() != k) return false;
    for (int i = 0; i < k; ++i) {
        if (std::abs(policy.delta(i, i)) > tol) return false;
        double row = 0.0;
        for (int j = 0; j < k; ++j) {
            if (policy.delta(i, j) < -tol) return false;
            row += policy.delta(i, j);
        }
        if (row > slot_seconds * p_tilde[i] + tol) return false;
    }
    return true;
}

CooperationPolicy reduce_to_half_duplex(const CooperationPolicy& policy,
                                        const Mat& alpha_eff,
                                        const Vec& p_tilde,
                                        double slot_seconds) {
    if (!is_feasible(policy, p_tilde, slot_seconds)) {
        throw InfeasiblePolicy("reduce_to_half_duplex: infeasible input policy");
    }
    const int kUsers = policy.users();
    Mat d = policy.delta;

    auto first_incoming = [&](int k) {
        for (int l = 0; l < kUsers; ++l) {
            if (l != k && d(l, k) > 0.0 && alpha_eff(l, k) > 0.0) return l;
        }
        return -1;
    };
    auto first_outgoing = [&](int k) {
        for (int m = 0; m < kUsers; ++m) {
            if (m != k && d(k, m) > 0.0) return m;
        }
        return -1;
    };

    // Resolve users one at a time. Each cancellation zeroes one edge
    // incident to user k and only ever touches edges between other
    // users, so earlier users stay resolved.
    for (int k = 0; k < kUsers; ++k) {
        for (;;) {
            const int l = first_incoming(k);
            if (l < 0) break;
            const int m = first_outgoing(k);
            if (m < 0) break;

            const double a_in = alpha_eff(l, k);
            // Shrink delta_lk by x and delta_km by y = a_in * x so user
            // k's power is unchanged; decide which edge saturates first.
            double x;
            double y;
            if (d(l, k) * a_in <= d(k, m)) {
                x = d(l, k);
                y = x * a_in;
                d(l, k) = 0.0;
                d(k, m) = std::max(0.0, d(k, m) - y);
            } else {
                y = d(k, m);
                x = y / a_in;
                d(k, m) = 0.0;
                d(l, k) = std::max(0.0, d(l, k) - x);
            }

            if (m != l && y > 0.0 && alpha_eff(k, m) > 0.0) {
                // Reroute the displaced flow directly: keeps user m's
                // received energy unchanged, and the routed efficiency
                // bound alpha_lm >= alpha_lk * alpha_km guarantees
                // z <= x so user l never sends more than it saved.
                if (alpha_eff(l, m) <= 0.0) {
                    throw InvalidParameter(
                        "reduce_to_half_duplex: alpha_eff is not routing-closed");
                }
                const double z = alpha_eff(k, m) * y / alpha_eff(l, m);
                d(l, m) += std::min(z, x);
            }
        }
    }

    CooperationPolicy out;
    out.delta = std::move(d);
    return out;
}

}  // namespace macec
