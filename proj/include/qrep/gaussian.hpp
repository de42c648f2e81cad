#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

#include "qrep/common.hpp"
#include "qrep/fock.hpp"

namespace qrep {

/// Two-mode Gaussian state in the (x1, p1, x2, p2) ordering, vacuum variance 1.
struct TwoModeCovariance {
    Eigen::Vector4d mean = Eigen::Vector4d::Zero();
    Eigen::Matrix4d cov = Eigen::Matrix4d::Identity();
};

inline Eigen::Matrix4d symplectic_form() {
    Eigen::Matrix4d omega = Eigen::Matrix4d::Zero();
    omega(0, 1) = 1; omega(1, 0) = -1;
    omega(2, 3) = 1; omega(3, 2) = -1;
    return omega;
}

/// Symplectic eigenvalues (each listed once), vacuum normalized to 1.
inline Eigen::Vector2d symplectic_eigenvalues(const Eigen::Matrix4d& cov) {
    Eigen::Matrix4cd m = cplx(0, 1) * symplectic_form() * cov.cast<cplx>();
    Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(m, false);
    Eigen::Vector4d abs = es.eigenvalues().cwiseAbs();
    std::sort(abs.data(), abs.data() + 4);
    return {abs(0), abs(2)};  // eigenvalues come in +/- pairs
}

inline bool is_physical(const TwoModeCovariance& s, double tol = 1e-9) {
    return symplectic_eigenvalues(s.cov).minCoeff() >= 1.0 - tol;
}

inline TwoModeCovariance tmsv_covariance(const TmsvParam& chi) {
    const double x = chi.chi;
    const double a = (1.0 + x * x) / (1.0 - x * x);
    const double c = 2.0 * x / (1.0 - x * x);
    TwoModeCovariance s;
    s.cov << a, 0, c, 0,
             0, a, 0, -c,
             c, 0, a, 0,
             0, -c, 0, a;
    return s;
}

/// Pure loss of transmittance eta on one arm (0 or 1).
inline TwoModeCovariance loss_map(const TwoModeCovariance& state, int arm, double eta) {
    if (arm != 0 && arm != 1) throw std::invalid_argument("loss_map: arm must be 0 or 1");
    if (eta < 0.0 || eta > 1.0) throw std::invalid_argument("loss_map: eta out of [0,1]");
    const double rt = std::sqrt(eta);
    Eigen::Matrix4d scale = Eigen::Matrix4d::Identity();
    scale(2 * arm, 2 * arm) = rt;
    scale(2 * arm + 1, 2 * arm + 1) = rt;
    TwoModeCovariance out;
    out.cov = scale * state.cov * scale;
    out.cov(2 * arm, 2 * arm) += 1.0 - eta;
    out.cov(2 * arm + 1, 2 * arm + 1) += 1.0 - eta;
    out.mean = scale * state.mean;
    return out;
}

/// EPR excess-noise variances of a teleportation resource: the variance of
/// x_meas - x_out and p_meas + p_out, with the measured arm first.
inline std::pair<double, double> epr_noise(const TwoModeCovariance& resource,
                                           int measured_arm = 0) {
    const int a = 2 * measured_arm, b = 2 * (1 - measured_arm);
    double nx = resource.cov(a, a) + resource.cov(b, b) - 2.0 * resource.cov(a, b);
    double np = resource.cov(a + 1, a + 1) + resource.cov(b + 1, b + 1) +
                2.0 * resource.cov(a + 1, b + 1);
    return {nx, np};
}

/// Unity-gain continuous-variable teleportation of one arm of `input` through
/// a two-mode resource. The teleported arm picks up the resource's EPR noise.
inline TwoModeCovariance cv_teleport(const TwoModeCovariance& input, int input_arm,
                                     const TwoModeCovariance& resource,
                                     int resource_measured_arm = 0) {
    if (input_arm != 0 && input_arm != 1)
        throw std::invalid_argument("cv_teleport: input_arm must be 0 or 1");
    auto [nx, np] = epr_noise(resource, resource_measured_arm);
    TwoModeCovariance out = input;
    out.cov(2 * input_arm, 2 * input_arm) += nx;
    out.cov(2 * input_arm + 1, 2 * input_arm + 1) += np;
    return out;
}

/// Effective Gaussian channel of a teleporter whose classical feedforward gain
/// is tuned to minimize the added noise: amplitude scaling by `gain` plus the
/// additive noises below. Unity gain recovers the plain EPR noise.
struct TeleportChannel {
    double gain = 1.0;
    double noise_x = 0.0;  // total additive noise at this gain
    double noise_p = 0.0;
};

inline TeleportChannel teleport_channel(const TwoModeCovariance& resource,
                                        int measured_arm, double gain) {
    const int a = 2 * measured_arm, b = 2 * (1 - measured_arm);
    TeleportChannel ch;
    ch.gain = gain;
    ch.noise_x = gain * gain * resource.cov(a, a) + resource.cov(b, b) -
                 2.0 * gain * resource.cov(a, b);
    ch.noise_p = gain * gain * resource.cov(a + 1, a + 1) + resource.cov(b + 1, b + 1) +
                 2.0 * gain * resource.cov(a + 1, b + 1);
    return ch;
}

/// Gain minimizing the excess noise beyond what the amplitude scaling itself
/// implies (x and p share one physical gain). For a pure TMSV resource of
/// correlation chi this lands on gain = chi, where the teleporter reduces
/// exactly to a pure-loss channel of transmittance chi^2 with zero excess.
inline TeleportChannel tuned_teleport_channel(const TwoModeCovariance& resource,
                                              int measured_arm = 0) {
    const int a = 2 * measured_arm, b = 2 * (1 - measured_arm);
    const double g = (resource.cov(a, b) - resource.cov(a + 1, b + 1)) /
                     (resource.cov(a, a) + resource.cov(a + 1, a + 1) + 2.0);
    return teleport_channel(resource, measured_arm, std::max(0.0, g));
}

/// Applies a teleporter's effective channel to one mode of a Fock-space state:
/// amplitude scaling realized as loss (gain < 1) or amplification (gain > 1),
/// followed by the excess classical noise beyond what the scaling itself adds.
/// The x/p noise asymmetry is averaged (the physical channel is phase
/// insensitive for the symmetric resources used here).
inline FockState apply_teleport_channel(const FockState& state, int mode,
                                        const TeleportChannel& ch) {
    const double g2 = ch.gain * ch.gain;
    const double intrinsic = std::abs(1.0 - g2);
    const double excess =
        std::max(0.0, 0.5 * (ch.noise_x + ch.noise_p) - intrinsic);
    FockState s = state;
    if (g2 < 1.0) s = apply_loss(s, mode, g2);
    else if (g2 > 1.0) {
        const double nbar = s.mean_photon(mode);
        const int headroom = std::max(8, int(std::ceil(4.0 * ((g2 - 1.0) * (nbar + 1.0) + 1.0))) + 8);
        s = apply_amplifier(s, mode, g2, headroom);
    }
    return add_classical_noise(s, mode, excess);
}

/// Quadrature mean vector of a Fock-space state (x = a + a^dag convention).
inline Eigen::VectorXd fock_mean_vector(const FockState& s) {
    Eigen::VectorXcd a = s.ladder_means();
    Eigen::VectorXd mu(2 * s.num_modes());
    for (int m = 0; m < s.num_modes(); ++m) {
        mu(2 * m) = 2.0 * a(m).real();
        mu(2 * m + 1) = 2.0 * a(m).imag();
    }
    return mu;
}

/// Symmetrized quadrature covariance matrix of a Fock-space state.
inline Eigen::MatrixXd fock_covariance(const FockState& s) {
    const int nm = s.num_modes();
    Eigen::MatrixXcd m, sq;
    s.ladder_pair_moments(m, sq);
    Eigen::VectorXcd al = s.ladder_means();
    Eigen::MatrixXd v(2 * nm, 2 * nm);
    for (int i = 0; i < nm; ++i)
        for (int j = 0; j < nm; ++j) {
            const double delta = (i == j) ? 1.0 : 0.0;
            double xx = 2.0 * sq(i, j).real() + 2.0 * m(i, j).real() + delta;
            double pp = -2.0 * sq(i, j).real() + 2.0 * m(i, j).real() + delta;
            double xp = 2.0 * sq(i, j).imag() + 2.0 * m(i, j).imag();
            double px = 2.0 * sq(i, j).imag() - 2.0 * m(i, j).imag();
            const double mux_i = 2.0 * al(i).real(), mup_i = 2.0 * al(i).imag();
            const double mux_j = 2.0 * al(j).real(), mup_j = 2.0 * al(j).imag();
            v(2 * i, 2 * j) = xx - mux_i * mux_j;
            v(2 * i + 1, 2 * j + 1) = pp - mup_i * mup_j;
            v(2 * i, 2 * j + 1) = xp - mux_i * mup_j;
            v(2 * i + 1, 2 * j) = px - mup_i * mux_j;
        }
    // enforce exact symmetry (the i=j off-diagonal xp entries are already symmetrized)
    return 0.5 * (v + v.transpose());
}

inline TwoModeCovariance fock_two_mode_summary(const FockState& s) {
    if (s.num_modes() != 2)
        throw std::invalid_argument("fock_two_mode_summary: need exactly two modes");
    TwoModeCovariance out;
    out.mean = fock_mean_vector(s);
    out.cov = fock_covariance(s);
    return out;
}

}  // namespace qrep
