#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include "qrep/common.hpp"

namespace qrep {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using SpMat = Eigen::SparseMatrix<cplx>;

namespace detail {

inline double log_factorial(int n) { return std::lgamma(double(n) + 1.0); }

/// sqrt(j! k! / (n! m!)) evaluated through log-gamma.
inline double sqrt_fact_ratio(int j, int k, int n, int m) {
    return std::exp(0.5 * (log_factorial(j) + log_factorial(k) -
                           log_factorial(n) - log_factorial(m)));
}

inline double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r *= double(n - k + i) / double(i);
    return r;
}

}  // namespace detail

/// Truncated multimode density operator. Probabilities of past heralded
/// operations accumulate in `weight`; the matrix itself stays trace one.
/// Basis ordering: mode 0 is the most significant digit.
class FockState {
public:
    FockState() = default;

    static FockState vacuum(const std::vector<int>& cutoffs) {
        FockState s;
        s.cutoffs_ = cutoffs;
        for (int c : cutoffs)
            if (c < 0) throw std::invalid_argument("FockState: negative cutoff");
        const int d = dim_of(cutoffs);
        s.rho_ = Mat::Zero(d, d);
        s.rho_(0, 0) = 1.0;
        return s;
    }

    /// Single-mode Fock state |n><n|.
    static FockState fock(int n, int cutoff) {
        if (n > cutoff) throw std::invalid_argument("FockState::fock: n above cutoff");
        FockState s = vacuum({cutoff});
        s.rho_(0, 0) = 0.0;
        s.rho_(n, n) = 1.0;
        return s;
    }

    static FockState from_density(const Mat& rho, const std::vector<int>& cutoffs) {
        FockState s;
        s.cutoffs_ = cutoffs;
        if (rho.rows() != dim_of(cutoffs) || rho.cols() != rho.rows())
            throw std::invalid_argument("FockState::from_density: dimension mismatch");
        s.rho_ = rho;
        double tr = s.rho_.trace().real();
        if (tr <= 0.0) throw std::invalid_argument("FockState::from_density: nonpositive trace");
        s.rho_ /= tr;
        return s;
    }

    int num_modes() const { return int(cutoffs_.size()); }
    int cutoff(int mode) const { check_mode(mode); return cutoffs_[mode]; }
    const std::vector<int>& cutoffs() const { return cutoffs_; }
    int dim() const { return int(rho_.rows()); }
    const Mat& rho() const { return rho_; }
    double weight() const { return weight_; }
    double truncation_defect() const { return defect_; }

    double trace() const { return rho_.trace().real(); }

    cplx element(const std::vector<int>& bra, const std::vector<int>& ket) const {
        return rho_(index_of(bra), index_of(ket));
    }

    /// Encodes a multi-index into a flat basis index.
    int index_of(const std::vector<int>& ns) const {
        if (int(ns.size()) != num_modes())
            throw std::invalid_argument("FockState::index_of: wrong arity");
        int idx = 0;
        for (int m = 0; m < num_modes(); ++m) {
            if (ns[m] < 0 || ns[m] > cutoffs_[m])
                throw std::invalid_argument("FockState::index_of: occupation out of range");
            idx = idx * (cutoffs_[m] + 1) + ns[m];
        }
        return idx;
    }

    double mean_photon(int mode) const {
        check_mode(mode);
        double v = 0.0;
        const int d = dim();
        for (int i = 0; i < d; ++i) v += digit(i, mode) * rho_(i, i).real();
        return v;
    }

    // --- mutating internals used by the free-function API below ---

    void scale_weight(double p) { weight_ *= p; }

    /// rho' = sum_k K_k rho K_k^dagger with every K_k acting on one mode.
    /// Kraus matrices may be rectangular; `out_cutoff` is the mode's new cutoff.
    void kraus_on_mode(int mode, const std::vector<Mat>& kraus, int out_cutoff) {
        check_mode(mode);
        std::vector<int> out = cutoffs_;
        out[mode] = out_cutoff;
        Mat acc = Mat::Zero(dim_of(out), dim_of(out));
        for (const Mat& k : kraus) {
            SpMat L = lift_single(mode, k, out);
            acc.noalias() += L * rho_ * L.adjoint();
        }
        rho_ = std::move(acc);
        cutoffs_ = out;
    }

    /// Heralded filter K on one mode: returns the herald probability, folds it
    /// into weight and renormalizes. K may be rectangular (cutoff change).
    double heralded_on_mode(int mode, const Mat& k, int out_cutoff) {
        check_mode(mode);
        std::vector<int> out = cutoffs_;
        out[mode] = out_cutoff;
        SpMat L = lift_single(mode, k, out);
        Mat next = L * rho_ * L.adjoint();
        double p = next.trace().real();
        if (p < 1e-280)  // guard against underflow; tiny heralds are otherwise exact
            throw std::domain_error("FockState: heralded branch has vanishing probability");
        rho_ = next / p;
        cutoffs_ = out;
        weight_ *= p;
        return p;
    }

    /// Two-mode operator given as a list of matrix elements
    /// (na', nb') <- (na, nb). Used for beam splitters.
    void two_mode_op(int mode_a, int mode_b,
                     const std::vector<std::tuple<int, int, int, int, cplx>>& entries,
                     int out_cutoff_a, int out_cutoff_b) {
        check_mode(mode_a);
        check_mode(mode_b);
        if (mode_a == mode_b) throw std::invalid_argument("FockState: identical modes");
        std::vector<int> out = cutoffs_;
        out[mode_a] = out_cutoff_a;
        out[mode_b] = out_cutoff_b;
        SpMat L = lift_pair(mode_a, mode_b, entries, out);
        Mat next = L * rho_ * L.adjoint();
        double tr_before = rho_.trace().real();
        rho_ = std::move(next);
        cutoffs_ = out;
        defect_ += std::abs(tr_before - rho_.trace().real());
    }

    /// Projects the mode onto photon numbers <= nmax (heralded), shrinking its
    /// cutoff to nmax. Returns the herald probability.
    double project_subspace(int mode, int nmax) {
        Mat p = Mat::Zero(nmax + 1, cutoffs_[mode] + 1);
        for (int n = 0; n <= std::min(nmax, cutoffs_[mode]); ++n) p(n, n) = 1.0;
        return heralded_on_mode(mode, p, nmax);
    }

    void drop_mode_if_scalar(int mode) {
        if (cutoffs_[mode] != 0)
            throw std::logic_error("FockState: mode not reduced to vacuum");
        cutoffs_.erase(cutoffs_.begin() + mode);
        // dimension is unchanged; only the bookkeeping shrinks
    }

    void resize_mode(int mode, int new_cutoff) {
        check_mode(mode);
        const int old = cutoffs_[mode];
        if (new_cutoff == old) return;
        Mat k = Mat::Zero(new_cutoff + 1, old + 1);
        for (int n = 0; n <= std::min(old, new_cutoff); ++n) k(n, n) = 1.0;
        std::vector<int> out = cutoffs_;
        out[mode] = new_cutoff;
        SpMat L = lift_single(mode, k, out);
        Mat next = L * rho_ * L.adjoint();
        defect_ += std::abs(rho_.trace().real() - next.trace().real());
        rho_ = std::move(next);
        cutoffs_ = out;
    }

    void add_vacuum_mode(int cutoff) {
        const int d = dim();
        const int dn = cutoff + 1;
        Mat next = Mat::Zero(d * dn, d * dn);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) next(i * dn, j * dn) = rho_(i, j);
        rho_ = std::move(next);
        cutoffs_.push_back(cutoff);
    }

    void trace_out(int mode) {
        check_mode(mode);
        if (num_modes() == 1)
            throw std::invalid_argument("FockState: cannot trace out the last mode");
        std::vector<int> out = cutoffs_;
        out.erase(out.begin() + mode);
        const int dnew = dim_of(out);
        Mat next = Mat::Zero(dnew, dnew);
        const int d = dim();
        std::vector<int> reduced(d), mode_digit(d), digits(num_modes());
        for (int i = 0; i < d; ++i) {
            decode(i, digits);
            reduced[i] = reduced_index(digits, mode, out);
            mode_digit[i] = digits[size_t(mode)];
        }
        for (int j = 0; j < d; ++j)
            for (int i = 0; i < d; ++i)
                if (mode_digit[i] == mode_digit[j])
                    next(reduced[i], reduced[j]) += rho_(i, j);
        rho_ = std::move(next);
        cutoffs_ = out;
    }

    void note_truncation(double d) { defect_ += d; }

    /// <a_i> for every mode.
    Eigen::VectorXcd ladder_means() const {
        Eigen::VectorXcd v(num_modes());
        for (int m = 0; m < num_modes(); ++m) v(m) = expect_op(m, -1);
        return v;
    }

    /// Pair moments: M(i,j) = <a_i^dag a_j>, S(i,j) = <a_i a_j>.
    void ladder_pair_moments(Eigen::MatrixXcd& m_out, Eigen::MatrixXcd& s_out) const;

private:
    std::vector<int> cutoffs_;
    Mat rho_;
    double weight_ = 1.0;
    double defect_ = 0.0;

    static int dim_of(const std::vector<int>& cutoffs) {
        int d = 1;
        for (int c : cutoffs) d *= c + 1;
        return d;
    }

    void check_mode(int mode) const {
        if (mode < 0 || mode >= num_modes())
            throw std::invalid_argument("FockState: mode index out of range");
    }

    int digit(int idx, int mode) const {
        int stride = 1;
        for (int m = num_modes() - 1; m > mode; --m) stride *= cutoffs_[m] + 1;
        return (idx / stride) % (cutoffs_[mode] + 1);
    }

    void decode(int idx, std::vector<int>& digits) const {
        for (int m = num_modes() - 1; m >= 0; --m) {
            digits[m] = idx % (cutoffs_[m] + 1);
            idx /= cutoffs_[m] + 1;
        }
    }

    static int reduced_index(const std::vector<int>& digits, int skip,
                             const std::vector<int>& out) {
        int idx = 0, k = 0;
        for (int m = 0; m < int(digits.size()); ++m) {
            if (m == skip) continue;
            idx = idx * (out[k] + 1) + digits[m];
            ++k;
        }
        return idx;
    }

    /// Embeds a one-mode operator into the full space.
    SpMat lift_single(int mode, const Mat& k, const std::vector<int>& out) const {
        const int dout = dim_of(out);
        std::vector<Eigen::Triplet<cplx>> trips;
        const int d = dim();
        std::vector<int> digits(num_modes());
        for (int col = 0; col < d; ++col) {
            decode(col, digits);
            const int n = digits[size_t(mode)];
            for (int np = 0; np < k.rows(); ++np) {
                if (k(np, n) == cplx(0.0)) continue;
                std::vector<int> dr = digits;
                dr[size_t(mode)] = np;
                int row = 0;
                for (int m = 0; m < num_modes(); ++m) row = row * (out[m] + 1) + dr[m];
                trips.emplace_back(row, col, k(np, n));
            }
        }
        SpMat l(dout, d);
        l.setFromTriplets(trips.begin(), trips.end());
        return l;
    }

    SpMat lift_pair(int mode_a, int mode_b,
                    const std::vector<std::tuple<int, int, int, int, cplx>>& entries,
                    const std::vector<int>& out) const {
        const int dout = dim_of(out);
        const int d = dim();
        // bucket entries by source occupation pair
        std::vector<std::vector<std::tuple<int, int, cplx>>> by_src;
        const int da = cutoffs_[mode_a] + 1, db = cutoffs_[mode_b] + 1;
        by_src.resize(size_t(da) * db);
        for (const auto& [nap, nbp, na, nb, amp] : entries) {
            if (na >= da || nb >= db) continue;
            if (nap > out[mode_a] || nbp > out[mode_b]) continue;
            by_src[size_t(na) * db + nb].emplace_back(nap, nbp, amp);
        }
        std::vector<Eigen::Triplet<cplx>> trips;
        std::vector<int> digits(num_modes());
        for (int col = 0; col < d; ++col) {
            decode(col, digits);
            const auto& outs = by_src[size_t(digits[size_t(mode_a)]) * db + digits[size_t(mode_b)]];
            for (const auto& [nap, nbp, amp] : outs) {
                std::vector<int> dr = digits;
                dr[size_t(mode_a)] = nap;
                dr[size_t(mode_b)] = nbp;
                int row = 0;
                for (int m = 0; m < num_modes(); ++m) row = row * (out[m] + 1) + dr[m];
                trips.emplace_back(row, col, amp);
            }
        }
        SpMat l(dout, d);
        l.setFromTriplets(trips.begin(), trips.end());
        return l;
    }

    /// <a_i^dag a_j> for which >= 0, <a_i> for which = -1 (single index in `i`).
    cplx expect_op(int i, int j) const;

    friend SpMat annihilator(const FockState& s, int mode);
};

/// Sparse annihilation operator of one mode on the full space.
inline SpMat annihilator(const FockState& s, int mode) {
    const int d = s.dim();
    std::vector<Eigen::Triplet<cplx>> trips;
    std::vector<int> digits(s.num_modes());
    for (int col = 0; col < d; ++col) {
        s.decode(col, digits);
        const int n = digits[size_t(mode)];
        if (n == 0) continue;
        std::vector<int> dr = digits;
        dr[size_t(mode)] = n - 1;
        trips.emplace_back(s.index_of(dr), col, cplx(std::sqrt(double(n))));
    }
    SpMat a(d, d);
    a.setFromTriplets(trips.begin(), trips.end());
    return a;
}

inline cplx FockState::expect_op(int i, int j) const {
    SpMat ai = annihilator(*this, i);
    if (j < 0) return (ai * rho_).eval().trace();
    SpMat aj = (i == j) ? ai : annihilator(*this, j);
    return (ai.adjoint() * aj * rho_).eval().trace();
}

inline void FockState::ladder_pair_moments(Eigen::MatrixXcd& m_out,
                                           Eigen::MatrixXcd& s_out) const {
    const int nm = num_modes();
    m_out.resize(nm, nm);
    s_out.resize(nm, nm);
    std::vector<SpMat> a;
    a.reserve(nm);
    for (int m = 0; m < nm; ++m) a.push_back(annihilator(*this, m));
    for (int i = 0; i < nm; ++i)
        for (int j = 0; j < nm; ++j) {
            m_out(i, j) = (a[i].adjoint() * a[j] * rho_).eval().trace();
            s_out(i, j) = (a[i] * a[j] * rho_).eval().trace();
        }
}

// ---------------------------------------------------------------------------
// Free-function operations (value semantics).
// ---------------------------------------------------------------------------

struct TmsvBuildInfo {
    double retained_norm = 1.0;   // norm kept by the truncation, before renormalizing
    bool truncation_warning = false;
};

/// Two-mode squeezed vacuum truncated at `cutoff` photons per arm.
inline FockState make_tmsv(const TmsvParam& chi, int cutoff, TmsvBuildInfo* info = nullptr) {
    if (cutoff < 1) throw std::invalid_argument("make_tmsv: cutoff must be >= 1");
    const double x = chi.chi;
    const int d = cutoff + 1;
    Eigen::VectorXd amp(d);
    double norm = 0.0;
    for (int n = 0; n < d; ++n) {
        amp(n) = std::pow(x, n);
        norm += amp(n) * amp(n);
    }
    const double full_norm = (x < 1.0) ? 1.0 / (1.0 - x * x) : norm;
    const double retained = norm / full_norm;
    amp /= std::sqrt(norm);

    Mat rho = Mat::Zero(d * d, d * d);
    for (int n = 0; n < d; ++n)
        for (int m = 0; m < d; ++m) rho(n * d + n, m * d + m) = amp(n) * amp(m);
    FockState s = FockState::from_density(rho, {cutoff, cutoff});
    s.note_truncation(1.0 - retained);
    if (info) {
        info->retained_norm = retained;
        info->truncation_warning = retained < 1.0 - 1e-6;
    }
    return s;
}

/// Pure-loss Kraus family on one mode.
inline std::vector<Mat> loss_kraus(int cutoff, double eta) {
    const int d = cutoff + 1;
    std::vector<Mat> ks;
    for (int k = 0; k < d; ++k) {
        Mat a = Mat::Zero(d, d);
        bool nonzero = false;
        for (int n = k; n < d; ++n) {
            double c = std::sqrt(detail::binomial(n, k)) *
                       std::pow(eta, 0.5 * (n - k)) * std::pow(1.0 - eta, 0.5 * k);
            if (c != 0.0) nonzero = true;
            a(n - k, n) = c;
        }
        if (nonzero) ks.push_back(std::move(a));
        if (eta == 1.0) break;  // only k = 0 survives
    }
    return ks;
}

inline FockState apply_loss(const FockState& state, int mode, double eta) {
    if (eta < 0.0 || eta > 1.0) throw std::invalid_argument("apply_loss: eta out of [0,1]");
    FockState s = state;
    s.kraus_on_mode(mode, loss_kraus(state.cutoff(mode), eta), state.cutoff(mode));
    return s;
}

/// Phase-insensitive amplifier channel of gain G >= 1. The mode cutoff is
/// grown by `headroom` to hold the amplified tail.
inline FockState apply_amplifier(const FockState& state, int mode, double gain,
                                 int headroom) {
    if (gain < 1.0) throw std::invalid_argument("apply_amplifier: gain must be >= 1");
    FockState s = state;
    if (gain == 1.0) return s;
    const int cin = state.cutoff(mode);
    const int cout = cin + headroom;
    const double mu = (gain - 1.0) / gain;
    std::vector<Mat> ks;
    for (int k = 0; k <= cout - 0; ++k) {
        Mat b = Mat::Zero(cout + 1, cin + 1);
        bool nonzero = false;
        for (int n = 0; n + k <= cout && n <= cin; ++n) {
            double c = std::sqrt(detail::binomial(n + k, k)) *
                       std::pow(1.0 / gain, 0.5 * (n + 1)) * std::pow(mu, 0.5 * k);
            if (c > 1e-300) nonzero = true;
            b(n + k, n) = c;
        }
        if (!nonzero) break;
        ks.push_back(std::move(b));
    }
    s.kraus_on_mode(mode, ks, cout);
    return s;
}

/// Additive Gaussian noise of `noise` vacuum units per quadrature, realized
/// exactly as loss 1/G followed by amplification G with G = 1 + noise/2.
inline FockState add_classical_noise(const FockState& state, int mode, double noise,
                                     int headroom = -1) {
    if (noise < 0.0) throw std::invalid_argument("add_classical_noise: negative noise");
    if (noise == 0.0) return state;
    const double g = 1.0 + 0.5 * noise;
    if (headroom < 0) {
        double nbar = state.mean_photon(mode);
        headroom = std::max(8, int(std::ceil(4.0 * ((g - 1.0) * (nbar + 1.0) + 1.0))) + 8);
    }
    FockState s = apply_loss(state, mode, 1.0 / g);
    return apply_amplifier(s, mode, g, headroom);
}

struct NlaResult {
    FockState state;
    double p_success = 1.0;
};

/// Heralded noiseless-linear-amplifier filter g^(n - N) on one mode, capped at
/// unit amplification above N so that g = 1 is the identity.
inline NlaResult apply_nla(const FockState& state, int mode, double gain, int nla_cutoff) {
    if (gain < 1.0) throw std::invalid_argument("apply_nla: gain must be >= 1");
    if (nla_cutoff < 0 || nla_cutoff > state.cutoff(mode))
        throw std::invalid_argument("apply_nla: nla_cutoff out of range");
    const int d = state.cutoff(mode) + 1;
    Mat k = Mat::Zero(d, d);
    for (int n = 0; n < d; ++n)
        k(n, n) = (n <= nla_cutoff) ? std::pow(gain, double(n - nla_cutoff)) : 1.0;
    FockState s = state;
    double p = s.heralded_on_mode(mode, k, state.cutoff(mode));
    return {std::move(s), p};
}

/// Beam splitter with real transmission amplitude sqrt(T) and reflection i*sqrt(1-T).
/// Output cutoffs default to the input ones; callers may enlarge or clip them.
inline FockState apply_beamsplitter(const FockState& state, int mode_a, int mode_b,
                                    double transmissivity, bool dagger = false,
                                    int out_cutoff_a = -1, int out_cutoff_b = -1) {
    if (transmissivity < 0.0 || transmissivity > 1.0)
        throw std::invalid_argument("apply_beamsplitter: transmissivity out of [0,1]");
    if (mode_a == mode_b) throw std::invalid_argument("apply_beamsplitter: identical modes");
    const int ca = state.cutoff(mode_a), cb = state.cutoff(mode_b);
    if (out_cutoff_a < 0) out_cutoff_a = ca;
    if (out_cutoff_b < 0) out_cutoff_b = cb;
    const double t = std::sqrt(transmissivity);
    const double r = std::sqrt(1.0 - transmissivity);
    const cplx ir = dagger ? cplx(0.0, -r) : cplx(0.0, r);

    std::vector<std::tuple<int, int, int, int, cplx>> entries;
    for (int na = 0; na <= ca; ++na)
        for (int nb = 0; nb <= cb; ++nb) {
            const int total = na + nb;
            for (int j = 0; j <= total; ++j) {
                if (j > out_cutoff_a || total - j > out_cutoff_b) continue;
                cplx amp = 0.0;
                for (int ja = std::max(0, j - nb); ja <= std::min(na, j); ++ja) {
                    const int jb = j - ja;
                    amp += detail::binomial(na, ja) * detail::binomial(nb, jb) *
                           std::pow(t, ja + (nb - jb)) * std::pow(ir, (na - ja) + jb);
                }
                if (amp == cplx(0.0)) continue;
                amp *= detail::sqrt_fact_ratio(j, total - j, na, nb);
                entries.emplace_back(j, total - j, na, nb, amp);
            }
        }
    FockState s = state;
    s.two_mode_op(mode_a, mode_b, entries, out_cutoff_a, out_cutoff_b);
    return s;
}

struct ProjectResult {
    FockState state;
    double p_success = 1.0;
};

/// Heralded projection of one mode onto |n>; the mode is removed.
inline ProjectResult project_fock(const FockState& state, int mode, int n) {
    if (n > state.cutoff(mode)) throw std::invalid_argument("project_fock: n above cutoff");
    FockState s = state;
    Mat k = Mat::Zero(1, state.cutoff(mode) + 1);
    k(0, n) = 1.0;
    double p = s.heralded_on_mode(mode, k, 0);
    if (s.num_modes() > 1)
        s.drop_mode_if_scalar(mode);
    return {std::move(s), p};
}

inline FockState partial_trace(const FockState& state, const std::vector<int>& keep) {
    if (keep.empty()) throw std::invalid_argument("partial_trace: empty keep list");
    std::vector<bool> keep_mask(size_t(state.num_modes()), false);
    for (int m : keep) {
        if (m < 0 || m >= state.num_modes())
            throw std::invalid_argument("partial_trace: mode index out of range");
        keep_mask[size_t(m)] = true;
    }
    FockState s = state;
    for (int m = state.num_modes() - 1; m >= 0; --m)
        if (!keep_mask[size_t(m)]) s.trace_out(m);
    return s;
}

}  // namespace qrep
