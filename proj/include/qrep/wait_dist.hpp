#pragma once

#include <unsupported/Eigen/FFT>
#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace qrep {

/// Probability mass function of a waiting time on a regular lattice.
/// Index k carries P(T = k * step). Distributions are kept to a tail mass
/// below ~1e-12 and coarsened (step doubling) when they outgrow the cap, so
/// expectations are numerically exact for all practical purposes.
class WaitDist {
public:
    static constexpr double kTailEps = 1e-12;
    static constexpr std::size_t kMaxLen = std::size_t(1) << 21;

    WaitDist() = default;

    static WaitDist geometric(double p, double attempt_s, double step_s) {
        if (p <= 0.0 || p > 1.0)
            throw std::invalid_argument("WaitDist::geometric: p out of (0,1]");
        WaitDist d;
        d.step_ = step_s;
        const int stride = std::max(1, int(std::llround(attempt_s / step_s)));
        if (p == 1.0) {
            d.pmf_.assign(std::size_t(stride) + 1, 0.0);
            d.pmf_.back() = 1.0;
            return d;
        }
        std::size_t n_att = std::size_t(std::ceil(std::log(kTailEps) / std::log1p(-p)));
        WaitDist g;
        g.step_ = step_s;
        g.pmf_.assign(n_att * stride + 1, 0.0);
        double q = p;
        for (std::size_t k = 1; k <= n_att; ++k) {
            g.pmf_[k * stride] = q;
            q *= 1.0 - p;
        }
        while (g.pmf_.size() > kMaxLen) g.coarsen();
        return g;
    }

    static WaitDist fixed(double t, double step_s) {
        WaitDist d;
        d.step_ = step_s;
        const std::size_t k = std::size_t(std::llround(t / step_s));
        d.pmf_.assign(k + 1, 0.0);
        d.pmf_[k] = 1.0;
        return d;
    }

    double step() const { return step_; }
    std::size_t size() const { return pmf_.size(); }

    double total() const {
        double s = 0.0;
        for (double v : pmf_) s += v;
        return s;
    }

    double mean() const {
        double s = 0.0, m = 0.0;
        for (std::size_t k = 0; k < pmf_.size(); ++k) {
            s += pmf_[k];
            m += double(k) * pmf_[k];
        }
        return s > 0.0 ? m * step_ / s : 0.0;
    }

    /// Adds a deterministic delay.
    WaitDist shifted(double t) const {
        WaitDist d = *this;
        const std::size_t k = std::size_t(std::llround(t / step_));
        d.pmf_.insert(d.pmf_.begin(), k, 0.0);
        d.trim();
        return d;
    }

    /// Maximum of independent copies: this one and `other`.
    WaitDist max_with(const WaitDist& other) const {
        WaitDist a = *this, b = other;
        align(a, b);
        const std::size_t n = std::max(a.pmf_.size(), b.pmf_.size());
        a.pmf_.resize(n, 0.0);
        b.pmf_.resize(n, 0.0);
        WaitDist out;
        out.step_ = a.step_;
        out.pmf_.assign(n, 0.0);
        double fa = 0.0, fb = 0.0, prev = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            fa += a.pmf_[k];
            fb += b.pmf_[k];
            const double f = fa * fb;
            out.pmf_[k] = f - prev;
            prev = f;
        }
        out.trim();
        return out;
    }

    /// Maximum of n iid copies of this distribution.
    WaitDist max_iid(int n) const {
        if (n < 1) throw std::invalid_argument("WaitDist::max_iid: n must be >= 1");
        if (n == 1) return *this;
        WaitDist out;
        out.step_ = step_;
        out.pmf_.assign(pmf_.size(), 0.0);
        double f = 0.0, prev = 0.0;
        for (std::size_t k = 0; k < pmf_.size(); ++k) {
            f += pmf_[k];
            const double fn = std::pow(f, n);
            out.pmf_[k] = fn - prev;
            prev = fn;
        }
        out.trim();
        return out;
    }

    /// Compound-geometric restart: repeat iid copies of this cycle until a
    /// success that occurs with probability p per cycle; total elapsed time.
    WaitDist restarted(double p) const {
        if (p <= 0.0 || p > 1.0)
            throw std::invalid_argument("WaitDist::restarted: p out of (0,1]");
        if (p == 1.0) return *this;
        WaitDist cycle = *this;
        for (;;) {
            const double target_mean = cycle.mean() / p;
            std::size_t want = std::size_t(
                std::min(4.0 * double(kMaxLen),
                         std::max(double(cycle.pmf_.size()) * 2.0,
                                  24.0 * target_mean / cycle.step_)));
            if (want <= kMaxLen) {
                WaitDist out = cycle.restart_fft(p, ceil_pow2(want));
                if (out.tail_ok() || cycle.step_ > 1e18) return out;
            }
            cycle.coarsen();
        }
    }

    const std::vector<double>& pmf() const { return pmf_; }

private:
    double step_ = 1.0;
    std::vector<double> pmf_{1.0};  // default: T = 0 surely

    void trim() {
        while (pmf_.size() > 1 && std::abs(pmf_.back()) < 1e-300) pmf_.pop_back();
        while (pmf_.size() > kMaxLen) coarsen();
    }

    void coarsen() {
        std::vector<double> half((pmf_.size() + 1) / 2, 0.0);
        for (std::size_t k = 0; k < pmf_.size(); ++k) half[k / 2] += pmf_[k];
        pmf_ = std::move(half);
        step_ *= 2.0;
    }

    bool tail_ok() const {
        double tail = 0.0;
        const std::size_t n = pmf_.size();
        for (std::size_t k = n - std::min<std::size_t>(n, 8); k < n; ++k)
            tail += std::abs(pmf_[k]);
        return tail < 1e-9;
    }

    static void align(WaitDist& a, WaitDist& b) {
        while (a.step_ < b.step_ * 0.999) a.coarsen();
        while (b.step_ < a.step_ * 0.999) b.coarsen();
        if (std::abs(a.step_ - b.step_) > 1e-9 * a.step_)
            throw std::logic_error("WaitDist: incompatible lattice steps");
    }

    static std::size_t ceil_pow2(std::size_t n) {
        std::size_t p = 1;
        while (p < n) p <<= 1;
        return p;
    }

    WaitDist restart_fft(double p, std::size_t len) const {
        std::vector<std::complex<double>> c(len, 0.0);
        for (std::size_t k = 0; k < pmf_.size() && k < len; ++k) c[k] = pmf_[k];
        Eigen::FFT<double> fft;
        std::vector<std::complex<double>> chat(len), that(len);
        fft.fwd(chat, c);
        for (std::size_t k = 0; k < len; ++k)
            that[k] = p * chat[k] / (1.0 - (1.0 - p) * chat[k]);
        std::vector<std::complex<double>> t(len);
        fft.inv(t, that);
        WaitDist out;
        out.step_ = step_;
        out.pmf_.resize(len);
        for (std::size_t k = 0; k < len; ++k) out.pmf_[k] = std::max(0.0, t[k].real());
        out.trim();
        return out;
    }
};

}  // namespace qrep
