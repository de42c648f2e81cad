#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "qrep/fock.hpp"
#include "qrep/gaussian.hpp"

namespace qrep {

enum class EofMethod { TwoQubitWootters, GaussianSymmetric, PureStateEntropy };

struct EntanglementReport {
    double eof = 0.0;
    double log_negativity = 0.0;
    EofMethod method = EofMethod::TwoQubitWootters;
    bool gaussian_approx = false;  // set when the state was moment-matched first
};

namespace detail {

inline double binary_entropy(double p) {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

inline double xlog2x(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

}  // namespace detail

/// Wootters concurrence of a two-qubit density matrix.
inline double concurrence(const Eigen::Matrix4cd& rho) {
    Eigen::Matrix4cd yy = Eigen::Matrix4cd::Zero();
    yy(0, 3) = -1; yy(1, 2) = 1; yy(2, 1) = 1; yy(3, 0) = -1;
    Eigen::Matrix4cd r = rho * yy * rho.conjugate() * yy;
    Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(r, false);
    Eigen::Vector4d lam = es.eigenvalues().real().cwiseMax(0.0).cwiseSqrt();
    std::sort(lam.data(), lam.data() + 4, std::greater<double>());
    return std::max(0.0, lam(0) - lam(1) - lam(2) - lam(3));
}

inline double eof_from_concurrence(double c) {
    return detail::binary_entropy(0.5 * (1.0 + std::sqrt(std::max(0.0, 1.0 - c * c))));
}

/// log2 trace norm of the partial transpose; the first `modes_in_a` modes form
/// one party.
inline double log_negativity(const FockState& s, int modes_in_a = 1) {
    if (modes_in_a <= 0 || modes_in_a >= s.num_modes())
        throw std::invalid_argument("log_negativity: invalid bipartition");
    int da = 1, db = 1;
    for (int m = 0; m < s.num_modes(); ++m) {
        if (m < modes_in_a) da *= s.cutoff(m) + 1;
        else db *= s.cutoff(m) + 1;
    }
    const Mat& rho = s.rho();
    Mat pt(da * db, da * db);
    for (int ia = 0; ia < da; ++ia)
        for (int ib = 0; ib < db; ++ib)
            for (int ja = 0; ja < da; ++ja)
                for (int jb = 0; jb < db; ++jb)
                    pt(ia * db + jb, ja * db + ib) = rho(ia * db + ib, ja * db + jb);
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (pt + pt.adjoint()),
                                          Eigen::EigenvaluesOnly);
    return std::log2(es.eigenvalues().cwiseAbs().sum());
}

inline double log_negativity(const TwoModeCovariance& s) {
    Eigen::Matrix4d pt = s.cov;
    pt.row(3) *= -1.0;
    pt.col(3) *= -1.0;
    double nu_min = symplectic_eigenvalues(pt).minCoeff();
    return std::max(0.0, -std::log2(nu_min));
}

/// Two-qubit entanglement of formation via the concurrence closed form.
inline EntanglementReport eof_two_qubit(const Eigen::Matrix4cd& rho) {
    EntanglementReport rep;
    rep.method = EofMethod::TwoQubitWootters;
    rep.eof = eof_from_concurrence(concurrence(rho));
    FockState f = FockState::from_density(rho.cast<cplx>(), {1, 1});
    rep.log_negativity = log_negativity(f, 1);
    return rep;
}

/// Same, for a Fock-space state whose support must sit inside the {0,1} photon
/// subspace of each of its two modes.
inline EntanglementReport eof_two_qubit(const FockState& s, double leak_tol = 1e-9) {
    if (s.num_modes() != 2)
        throw std::domain_error("eof_two_qubit: need exactly two modes");
    Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
    double kept = 0.0;
    const Mat& full = s.rho();
    for (int n0 = 0; n0 <= std::min(1, s.cutoff(0)); ++n0)
        for (int n1 = 0; n1 <= std::min(1, s.cutoff(1)); ++n1)
            for (int m0 = 0; m0 <= std::min(1, s.cutoff(0)); ++m0)
                for (int m1 = 0; m1 <= std::min(1, s.cutoff(1)); ++m1)
                    rho(n0 * 2 + n1, m0 * 2 + m1) =
                        full(s.index_of({n0, n1}), s.index_of({m0, m1}));
    kept = rho.trace().real();
    if (kept < 1.0 - leak_tol)
        throw std::domain_error("eof_two_qubit: support leaks above one photon");
    return eof_two_qubit(Eigen::Matrix4cd(rho / kept));
}

namespace detail {

/// Symmetric-Gaussian-state EoF as a function of the minimal EPR variance
/// sigma (= e^{-2r} for a pure TMSV of squeezing r); zero when sigma >= 1.
inline double eof_from_sigma(double sigma) {
    if (sigma >= 1.0) return 0.0;
    const double cp = 0.25 * std::pow(1.0 / std::sqrt(sigma) + std::sqrt(sigma), 2);
    const double cm = 0.25 * std::pow(1.0 / std::sqrt(sigma) - std::sqrt(sigma), 2);
    return xlog2x(cp) - xlog2x(cm);
}

}  // namespace detail

/// Entanglement of formation of a symmetric two-mode Gaussian state, from its
/// minimal EPR variance. Works on standard-form states (diagonal blocks equal).
inline EntanglementReport eof_gaussian_symmetric(const TwoModeCovariance& s,
                                                 double sym_tol = 1e-8) {
    Eigen::Matrix2d a = s.cov.block<2, 2>(0, 0);
    Eigen::Matrix2d b = s.cov.block<2, 2>(2, 2);
    if ((a - b).cwiseAbs().maxCoeff() > sym_tol)
        throw std::domain_error(
            "eof_gaussian_symmetric: asymmetric state; symmetrize or use bounds");
    auto [nx, np] = epr_noise(s);
    EntanglementReport rep;
    rep.method = EofMethod::GaussianSymmetric;
    rep.log_negativity = log_negativity(s);
    // sigma = e^{-2r} for a pure TMSV of squeezing r
    rep.eof = detail::eof_from_sigma(0.5 * std::sqrt(std::max(1e-300, nx * np)));
    return rep;
}

/// EoF bound for a general (possibly asymmetric) two-mode Gaussian state: the
/// symmetric closed form evaluated at the smallest partial-transpose
/// symplectic eigenvalue. For symmetric states this equals the minimal EPR
/// variance, so the two functions agree exactly there; for asymmetric states
/// it is the local-unitary-invariant extension (block averaging is not a
/// local unitary and can erase entanglement of skewed states).
inline EntanglementReport eof_gaussian_ppt(const TwoModeCovariance& s) {
    Eigen::Matrix4d pt = s.cov;
    pt.row(3) *= -1.0;
    pt.col(3) *= -1.0;
    const double nu = symplectic_eigenvalues(pt).minCoeff();
    EntanglementReport rep;
    rep.method = EofMethod::GaussianSymmetric;
    rep.log_negativity = std::max(0.0, -std::log2(nu));
    rep.eof = detail::eof_from_sigma(nu);
    return rep;
}

/// Entropy of entanglement of a pure TMSV with mean photon number nbar.
inline double tmsv_entropy_of_entanglement(double nbar) {
    return detail::xlog2x(nbar + 1.0) - detail::xlog2x(nbar);
}

/// Symmetrizes the diagonal blocks of a two-mode covariance. The EPR variances
/// (and hence the symmetric-state formula input) are unchanged.
inline TwoModeCovariance symmetrize_blocks(const TwoModeCovariance& s) {
    TwoModeCovariance out = s;
    Eigen::Matrix2d avg = 0.5 * (s.cov.block<2, 2>(0, 0) + s.cov.block<2, 2>(2, 2));
    out.cov.block<2, 2>(0, 0) = avg;
    out.cov.block<2, 2>(2, 2) = avg;
    return out;
}

}  // namespace qrep
