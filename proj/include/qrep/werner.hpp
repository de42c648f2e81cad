#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "qrep/fock.hpp"

namespace qrep {

/// A DV entangled pair tracked by its fidelity to |Phi+>.
struct WernerPair {
    double fidelity = 1.0;
    explicit WernerPair(double f) : fidelity(f) {
        if (f < 0.25 || f > 1.0)
            throw std::invalid_argument("WernerPair: fidelity must lie in [0.25, 1]");
    }
};

inline void check_werner_range(double f, const char* who) {
    if (f < 0.25 || f > 1.0)
        throw std::invalid_argument(std::string(who) + ": fidelity out of [0.25, 1]");
}

/// Fidelity after entanglement swapping of two equal-fidelity Werner pairs.
inline double swap_fidelity(double f) {
    check_werner_range(f, "swap_fidelity");
    return f * f + (1.0 - f) * (1.0 - f) / 3.0;
}

/// Which closed form to use for the two-copy purification step. `Standard` is
/// the form that matches the brute-force two-copy circuit; `AsPrinted` keeps a
/// published variant whose denominator middle term is (2/3)(1-F) instead of
/// (2/3)F(1-F) and is exposed for sensitivity analysis only.
enum class PurifyFormula { Standard, AsPrinted };

struct PurifyResult {
    double fidelity = 1.0;
    double p_success = 1.0;
};

inline PurifyResult purify(double f, PurifyFormula formula = PurifyFormula::Standard) {
    check_werner_range(f, "purify");
    const double q = (1.0 - f) / 3.0;
    const double num = f * f + q * q;
    double den;
    if (formula == PurifyFormula::Standard)
        den = f * f + 2.0 * f * q + 5.0 * q * q;
    else
        den = f * f + 2.0 * (1.0 - f) / 3.0 + 5.0 * q * q;
    return {num / den, den};
}

struct PurificationSchedule {
    int rounds = 0;
    int initial_pairs_per_link = 1;
    std::vector<double> fidelity_trajectory;  // F after round 0 (=initial), 1, ..., r
    double final_fidelity_after_swap = 1.0;
    bool feasible = true;
    double fixed_point = 1.0;  // asymptotic purification fidelity when infeasible
};

/// Minimal number of pre-swap purification rounds so that the swapped pair
/// meets `f_required`. `num_links` must be a power of two; one swap level per
/// halving.
inline PurificationSchedule solve_schedule(double f_initial, double f_required,
                                           int num_links = 2,
                                           PurifyFormula formula = PurifyFormula::Standard,
                                           int max_rounds = 64) {
    if (f_initial <= 0.5 || f_initial > 1.0)
        throw std::invalid_argument("solve_schedule: f_initial must lie in (0.5, 1]");
    int swap_levels = 0;
    for (int n = num_links; n > 1; n /= 2) {
        if (n % 2 != 0) throw std::invalid_argument("solve_schedule: num_links must be a power of two");
        ++swap_levels;
    }
    auto after_swaps = [&](double f) {
        for (int s = 0; s < swap_levels; ++s) f = swap_fidelity(f);
        return f;
    };
    PurificationSchedule sched;
    sched.fidelity_trajectory.push_back(f_initial);
    double f = f_initial;
    while (after_swaps(f) < f_required) {
        double next = purify(f, formula).fidelity;
        if (next <= f + 1e-13 || sched.rounds >= max_rounds) {
            sched.feasible = false;
            sched.fixed_point = next;
            sched.final_fidelity_after_swap = after_swaps(f);
            sched.rounds = int(sched.fidelity_trajectory.size()) - 1;
            sched.initial_pairs_per_link = 1 << sched.rounds;
            return sched;
        }
        f = next;
        sched.fidelity_trajectory.push_back(f);
        ++sched.rounds;
    }
    sched.initial_pairs_per_link = 1 << sched.rounds;
    sched.final_fidelity_after_swap = after_swaps(f);
    sched.fixed_point = 1.0;
    return sched;
}

/// Werner density matrix in the computational basis {00, 01, 10, 11}.
inline Eigen::Matrix4cd werner_density(double f) {
    check_werner_range(f, "werner_density");
    Eigen::Matrix4cd phi = Eigen::Matrix4cd::Zero();
    phi(0, 0) = phi(0, 3) = phi(3, 0) = phi(3, 3) = 0.5;
    return ((4.0 * f - 1.0) / 3.0) * phi +
           ((1.0 - f) / 3.0) * Eigen::Matrix4cd::Identity();
}

/// Werner pair embedded in two single-rail optical modes (cutoff 1 each).
inline FockState werner_fock(double f) {
    return FockState::from_density(werner_density(f).cast<cplx>(), {1, 1});
}

}  // namespace qrep
