#include "macec/channel_model.hpp"

#include "macec/energy_transfer.hpp"

#include <cmath>

namespace macec {

void RawMacParams::validate() const {
    const int k = users();
    if (k < 1) throw InvalidParameter("RawMacParams: need at least one user");
    for (int i = 0; i < k; ++i) {
        if (!(gains[i] > 0.0) || !std::isfinite(gains[i])) {
            throw InvalidParameter("RawMacParams: channel gains must be positive");
        }
    }
    if (!(noise_var > 0.0) || !std::isfinite(noise_var)) {
        throw InvalidParameter("RawMacParams: noise variance must be positive");
    }
    if (!(slot_seconds > 0.0) || !std::isfinite(slot_seconds)) {
        throw InvalidParameter("RawMacParams: slot length must be positive");
    }
    if (alpha_direct.rows() != k || alpha_direct.cols() != k) {
        throw InvalidParameter("RawMacParams: alpha matrix must be K x K");
    }
    for (int i = 0; i < k; ++i) {
        if (alpha_direct(i, i) != 0.0) {
            throw InvalidParameter("RawMacParams: alpha diagonal must be zero");
        }
        for (int j = 0; j < k; ++j) {
            if (alpha_direct(i, j) < 0.0 || alpha_direct(i, j) >= 1.0) {
                throw InvalidParameter("RawMacParams: alpha entries must lie in [0, 1)");
            }
        }
    }
    if (harvest_rate.size() != k) {
        throw InvalidParameter("RawMacParams: harvest rate vector must have K entries");
    }
    for (int i = 0; i < k; ++i) {
        if (harvest_rate[i] < 0.0 || !std::isfinite(harvest_rate[i])) {
            throw InvalidParameter("RawMacParams: harvest rates must be finite and >= 0");
        }
    }
}

NormalizedMac::NormalizedMac(Vec budget, Mat alpha, double slot)
    : users(static_cast<int>(budget.size())),
      p_budget(std::move(budget)),
      alpha_eff(std::move(alpha)),
      slot_seconds(slot) {
    if (alpha_eff.rows() != users || alpha_eff.cols() != users) {
        throw InvalidParameter("NormalizedMac: alpha matrix must be K x K");
    }
    if (!(slot_seconds > 0.0)) {
        throw InvalidParameter("NormalizedMac: slot length must be positive");
    }
    for (int i = 0; i < users; ++i) {
        if (p_budget[i] < 0.0) {
            throw InvalidParameter("NormalizedMac: power budgets must be >= 0");
        }
        if (alpha_eff(i, i) != 0.0) {
            throw InvalidParameter("NormalizedMac: alpha diagonal must be zero");
        }
        for (int j = 0; j < users; ++j) {
            if (alpha_eff(i, j) < 0.0) {
                throw InvalidParameter("NormalizedMac: alpha entries must be >= 0");
            }
        }
    }
}

NormalizedMac normalize(const RawMacParams& raw) {
    raw.validate();
    const int k = raw.users();

    const Mat routed = effective_efficiencies(raw.alpha_direct);

    // Powers scale by h_k / sigma^2; the per-slot budget is the mean
    // harvest over the slot length. Efficiencies scale by h_j / h_k so
    // transferred energy lands in the receiver's power units.
    Vec budget(k);
    for (int i = 0; i < k; ++i) {
        budget[i] = (raw.harvest_rate[i] / raw.slot_seconds) *
                    (raw.gains[i] / raw.noise_var);
    }
    Mat alpha = Mat::Zero(k, k);
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            if (i != j) alpha(i, j) = routed(i, j) * (raw.gains[j] / raw.gains[i]);
        }
    }
    return NormalizedMac(std::move(budget), std::move(alpha), raw.slot_seconds);
}

Vec denormalize_powers(const RawMacParams& raw, const Vec& normalized_p) {
    const int k = raw.users();
    if (normalized_p.size() != k) {
        throw InvalidParameter("denormalize_powers: shape mismatch");
    }
    Vec out(k);
    for (int i = 0; i < k; ++i) {
        out[i] = normalized_p[i] * (raw.noise_var / raw.gains[i]);
    }
    return out;
}

}  // namespace macec
