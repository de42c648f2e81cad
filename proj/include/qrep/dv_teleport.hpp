#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "qrep/common.hpp"
#include "qrep/fock.hpp"
#include "qrep/werner.hpp"

namespace qrep {

struct TeleporterConfig {
    int num_modes = 1;                 // balanced splitter tree: 1, 2, 4 or 8
    double bsm_success_prob = 0.5;     // linear-optics Bell measurement
    double werner_fidelity = 1.0;      // fidelity of each resource pair
    double photons_per_mode_threshold = 1.1;
    int peel_cutoff_cap = 14;          // working cutoff of a freshly split mode
};

/// Smallest balanced mode count keeping the per-mode mean photon number under
/// the threshold.
inline int choose_mode_count(const TmsvParam& chi, double threshold = 1.1) {
    const double nbar = chi.mean_photon();
    for (int n : {1, 2, 4, 8})
        if (nbar / n <= threshold) return n;
    throw std::domain_error("choose_mode_count: state too large for 8 modes");
}

struct TeleportResult {
    FockState state;                 // teleported mode replaces the input mode slot
    double success_prob = 1.0;       // product of all stage probabilities
    std::vector<double> p_qubit;     // per split mode: weight inside the {0,1} subspace
    double p_vacuum = 1.0;           // recombination post-selection probability
    double p_bsm_total = 1.0;        // bsm_success_prob^N
};

namespace detail {

/// Depolarizing channel on a single-rail qubit mode. p_identity = 1 keeps the
/// state; p_identity = 0 replaces the qubit by the maximally mixed state.
inline void depolarize_qubit_mode(FockState& s, int mode, double p_identity) {
    if (s.cutoff(mode) != 1)
        throw std::logic_error("depolarize_qubit_mode: mode is not a qubit");
    const double w_id = p_identity + (1.0 - p_identity) / 4.0;
    const double w_p = (1.0 - p_identity) / 4.0;
    if (w_p == 0.0) return;
    Mat id = Mat::Identity(2, 2);
    Mat x = Mat::Zero(2, 2), y = Mat::Zero(2, 2), z = Mat::Zero(2, 2);
    x(0, 1) = x(1, 0) = 1.0;
    y(0, 1) = cplx(0, -1); y(1, 0) = cplx(0, 1);
    z(0, 0) = 1.0; z(1, 1) = -1.0;
    std::vector<Mat> kraus = {std::sqrt(w_id) * id, std::sqrt(w_p) * x,
                              std::sqrt(w_p) * y, std::sqrt(w_p) * z};
    s.kraus_on_mode(mode, kraus, 1);
}

/// Single-rail qubit teleportation through a Werner resource of fidelity F:
/// heralded projection onto the {0,1} photon subspace followed by the
/// depolarizing channel whose Choi state is the Werner pair. Returns the
/// subspace herald probability.
inline double teleport_qubit_mode(FockState& s, int mode, double fidelity,
                                  double bsm_success_prob) {
    double p01 = s.project_subspace(mode, 1);
    depolarize_qubit_mode(s, mode, (4.0 * fidelity - 1.0) / 3.0);
    s.scale_weight(bsm_success_prob);
    return p01;
}

}  // namespace detail

/// Splits the chosen mode evenly over N modes, teleports each through its own
/// single-rail Werner channel, recombines coherently and post-selects the
/// ancilla ports on vacuum. The splitter is realized as a peel-off cascade
/// (reflectivity 1/N, 1/(N-1), ...), which distributes the amplitude evenly;
/// its exact inverse is applied for recombination.
inline TeleportResult teleport_cv_state(const FockState& input, int input_mode,
                                        const TeleporterConfig& cfg) {
    const int n = cfg.num_modes;
    if (n != 1 && n != 2 && n != 4 && n != 8)
        throw std::invalid_argument("teleport_cv_state: num_modes must be 1, 2, 4 or 8");
    check_werner_range(cfg.werner_fidelity, "teleport_cv_state");
    if (cfg.bsm_success_prob <= 0.0 || cfg.bsm_success_prob > 1.0)
        throw std::invalid_argument("teleport_cv_state: bsm_success_prob out of (0,1]");

    TeleportResult res;
    FockState s = input;
    const double w0 = s.weight();
    const int first_peeled = s.num_modes();

    std::vector<double> transmissivities;
    for (int k = 0; k < n - 1; ++k) {
        const double t = 1.0 - 1.0 / double(n - k);
        transmissivities.push_back(t);
        const int peel_cut = std::min(s.cutoff(input_mode), cfg.peel_cutoff_cap);
        s.add_vacuum_mode(peel_cut);
        s = apply_beamsplitter(s, input_mode, s.num_modes() - 1, t);
        res.p_qubit.push_back(detail::teleport_qubit_mode(
            s, s.num_modes() - 1, cfg.werner_fidelity, cfg.bsm_success_prob));
    }
    res.p_qubit.push_back(detail::teleport_qubit_mode(
        s, input_mode, cfg.werner_fidelity, cfg.bsm_success_prob));

    // inverse cascade; ancilla ports must read vacuum
    res.p_vacuum = 1.0;
    for (int k = n - 2; k >= 0; --k) {
        const int port = first_peeled + k;
        const int grown = std::min(s.cutoff(input_mode) + 1, n);
        s = apply_beamsplitter(s, input_mode, port, transmissivities[size_t(k)],
                               /*dagger=*/true, grown, 1);
        auto proj = project_fock(s, port, 0);
        s = std::move(proj.state);
        res.p_vacuum *= proj.p_success;
    }

    res.p_bsm_total = std::pow(cfg.bsm_success_prob, n);
    res.success_prob = s.weight() / w0;
    res.state = std::move(s);
    return res;
}

}  // namespace qrep
