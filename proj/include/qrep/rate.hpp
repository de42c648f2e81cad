#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "qrep/common.hpp"
#include "qrep/wait_dist.hpp"
#include "qrep/werner.hpp"

namespace qrep {

/// Per-attempt success probability of heralded elementary pair generation
/// across a link: channel transmittance only (sources, detectors and memories
/// are ideal in this model).
inline double elementary_success_prob(const ChannelSpec& link) {
    return link.transmittance();
}

/// Expected time until all n independent geometric processes (success prob p
/// per attempt, early successes held in memory) have succeeded.
inline double expected_parallel_wait(double p, int n_parallel, double attempt_time) {
    if (p <= 0.0 || p > 1.0)
        throw std::invalid_argument("expected_parallel_wait: p out of (0,1]");
    if (n_parallel < 1)
        throw std::invalid_argument("expected_parallel_wait: need n >= 1");
    double sum = 0.0;
    double binom = 1.0;
    for (int j = 1; j <= n_parallel; ++j) {
        binom *= double(n_parallel - j + 1) / double(j);
        const double sign = (j % 2 == 1) ? 1.0 : -1.0;
        // 1 - (1-p)^j evaluated without cancellation for tiny p
        sum += sign * binom / -std::expm1(double(j) * std::log1p(-p));
    }
    return attempt_time * sum;
}

// ---------------------------------------------------------------------------
// Retry structures: one description, two independent evaluations (exact
// lattice distributions and Monte Carlo sampling).
// ---------------------------------------------------------------------------

struct RetrySpec {
    enum class Kind { Geometric, Fixed, MaxOf, Sum, Restart };

    Kind kind = Kind::Fixed;
    double p = 1.0;        // Geometric attempt / Restart cycle success
    double time_s = 0.0;   // Geometric attempt time, Fixed delay, Sum extra delay
    int replicas = 1;      // iid copies when used as a MaxOf child
    std::vector<RetrySpec> children;

    static RetrySpec geometric(double p, double attempt_s) {
        RetrySpec r;
        r.kind = Kind::Geometric;
        r.p = p;
        r.time_s = attempt_s;
        return r;
    }
    static RetrySpec fixed(double t) {
        RetrySpec r;
        r.kind = Kind::Fixed;
        r.time_s = t;
        return r;
    }
    static RetrySpec max_of(std::vector<RetrySpec> kids) {
        RetrySpec r;
        r.kind = Kind::MaxOf;
        r.children = std::move(kids);
        return r;
    }
    static RetrySpec max_iid(RetrySpec child, int n) {
        child.replicas = n;
        RetrySpec r;
        r.kind = Kind::MaxOf;
        r.children = {std::move(child)};
        return r;
    }
    static RetrySpec sum(std::vector<RetrySpec> kids, double extra = 0.0) {
        RetrySpec r;
        r.kind = Kind::Sum;
        r.children = std::move(kids);
        r.time_s = extra;
        return r;
    }
    static RetrySpec restart(RetrySpec cycle, double p_success) {
        RetrySpec r;
        r.kind = Kind::Restart;
        r.p = p_success;
        r.children = {std::move(cycle)};
        return r;
    }

    double min_positive_time() const {
        double t = (time_s > 0.0) ? time_s : std::numeric_limits<double>::infinity();
        for (const auto& c : children) t = std::min(t, c.min_positive_time());
        return t;
    }
};

inline double sample_wait(const RetrySpec& spec, std::mt19937_64& rng) {
    switch (spec.kind) {
        case RetrySpec::Kind::Geometric: {
            if (spec.p >= 1.0) return spec.time_s;
            std::uniform_real_distribution<double> u(0.0, 1.0);
            const double k = std::ceil(std::log1p(-u(rng)) / std::log1p(-spec.p));
            return std::max(1.0, k) * spec.time_s;
        }
        case RetrySpec::Kind::Fixed:
            return spec.time_s;
        case RetrySpec::Kind::MaxOf: {
            double t = 0.0;
            for (const auto& c : spec.children)
                for (int i = 0; i < c.replicas; ++i)
                    t = std::max(t, sample_wait(c, rng));
            return t;
        }
        case RetrySpec::Kind::Sum: {
            double t = spec.time_s;
            for (const auto& c : spec.children)
                for (int i = 0; i < c.replicas; ++i) t += sample_wait(c, rng);
            return t;
        }
        case RetrySpec::Kind::Restart: {
            std::uniform_real_distribution<double> u(0.0, 1.0);
            double t = 0.0;
            for (;;) {
                t += sample_wait(spec.children[0], rng);
                if (u(rng) < spec.p) return t;
            }
        }
    }
    return 0.0;
}

/// Exact lattice evaluation of a retry structure.
inline WaitDist lattice_wait(const RetrySpec& spec, double step) {
    switch (spec.kind) {
        case RetrySpec::Kind::Geometric:
            return WaitDist::geometric(spec.p, spec.time_s, step);
        case RetrySpec::Kind::Fixed:
            return WaitDist::fixed(spec.time_s, step);
        case RetrySpec::Kind::MaxOf: {
            bool first = true;
            WaitDist acc;
            for (const auto& c : spec.children) {
                WaitDist d = lattice_wait(c, step).max_iid(c.replicas);
                acc = first ? d : acc.max_with(d);
                first = false;
            }
            return acc;
        }
        case RetrySpec::Kind::Sum: {
            // only the deterministic-offset case is needed here
            if (spec.children.size() != 1 || spec.children[0].replicas != 1)
                throw std::logic_error("lattice_wait: Sum supports one child plus a fixed delay");
            return lattice_wait(spec.children[0], step).shifted(spec.time_s);
        }
        case RetrySpec::Kind::Restart:
            return lattice_wait(spec.children[0], step).restarted(spec.p);
    }
    return WaitDist();
}

struct MonteCarloResult {
    double mean_s = 0.0;
    double stderr_s = 0.0;
};

/// Stochastic oracle for the analytic waiting times. Each trial runs on its
/// own seed-derived stream, so the aggregate is independent of execution order.
inline MonteCarloResult monte_carlo_wait(const RetrySpec& spec, std::int64_t trials,
                                         std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("monte_carlo_wait: trials must be >= 1");
    double sum = 0.0, sumsq = 0.0;
    for (std::int64_t i = 0; i < trials; ++i) {
        std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * std::uint64_t(i + 1)));
        const double t = sample_wait(spec, rng);
        sum += t;
        sumsq += t * t;
    }
    MonteCarloResult r;
    r.mean_s = sum / double(trials);
    const double var = std::max(0.0, sumsq / double(trials) - r.mean_s * r.mean_s);
    r.stderr_s = std::sqrt(var / double(trials));
    return r;
}

// ---------------------------------------------------------------------------
// Repeater rate compositions.
// ---------------------------------------------------------------------------

struct RateBreakdown {
    double attempt_time_s = 0.0;
    double p_elementary = 1.0;
    double expected_attempts = 1.0;
    double cc_delay_s = 0.0;
    double pairs_per_second = 0.0;
    double expected_total_s = 0.0;
    std::vector<std::pair<std::string, double>> components;  // (stage, expected seconds)
};

/// Shared clock constants. The attempt clock is one-way light travel over a
/// link; a zero-length link falls back to the source repetition clock.
struct RateModel {
    double source_rep_rate_hz = 1e6;
    bool normalize_per_mode = true;  // divide the DV rate by the teleporter mode count

    double attempt_time(const ChannelSpec& link) const {
        const double t = link.one_way_seconds();
        return t > 0.0 ? t : 1.0 / source_rep_rate_hz;
    }
};

/// Success probabilities of one teleporter attempt, taken from a Fock-space
/// evaluation of the splitter/teleport/recombine pipeline.
struct TeleporterYield {
    int num_modes = 1;
    std::vector<double> p_qubit;       // per-mode {0,1}-subspace heralds
    double p_vacuum = 1.0;             // recombination post-selection
    double bsm_success_prob = 0.5;

    double per_attempt() const {
        double p = p_vacuum * std::pow(bsm_success_prob, num_modes);
        for (double q : p_qubit) p *= q;
        return p;
    }

    static TeleporterYield trivial() { return {1, {1.0}, 1.0, 1.0}; }
};

/// Retry structure of the full DV distribution protocol: elementary pair
/// generation per link, purification rounds (a failure consumes both inputs
/// and restarts their generation), one swap, then the teleporter consuming one
/// end-to-end pair per mode per attempt.
inline RetrySpec dv_retry_spec(const PurificationSchedule& schedule,
                               const ChannelSpec& link, const TeleporterYield& yield,
                               const RateModel& model = {}) {
    if (!schedule.feasible)
        throw std::invalid_argument("dv_retry_spec: infeasible purification schedule");
    const double t_att = model.attempt_time(link);
    const double t_cc = link.one_way_seconds();
    const double t_e2e = 2.0 * link.one_way_seconds();
    const double p0 = elementary_success_prob(link);

    RetrySpec pair = RetrySpec::geometric(p0, t_att);
    for (int r = 1; r <= schedule.rounds; ++r) {
        const double p_round = purify(schedule.fidelity_trajectory[size_t(r) - 1]).p_success;
        RetrySpec cycle = RetrySpec::sum({RetrySpec::max_iid(pair, 2)}, t_cc);
        pair = RetrySpec::restart(std::move(cycle), p_round);
    }
    RetrySpec chain = RetrySpec::sum({RetrySpec::max_iid(pair, 2)}, t_e2e);

    const double p_tel = yield.per_attempt();
    if (p_tel >= 1.0 && yield.num_modes == 1) return chain;
    RetrySpec tel_cycle =
        RetrySpec::sum({RetrySpec::max_iid(std::move(chain), yield.num_modes)}, t_e2e);
    return RetrySpec::restart(std::move(tel_cycle), p_tel);
}

inline RateBreakdown dv_repeater_rate(const PurificationSchedule& schedule,
                                      const ChannelSpec& link,
                                      const TeleporterYield& yield,
                                      const RateModel& model = {}) {
    const double t_att = model.attempt_time(link);
    RetrySpec spec = dv_retry_spec(schedule, link, yield, model);
    WaitDist dist = lattice_wait(spec, t_att);

    RateBreakdown rb;
    rb.attempt_time_s = t_att;
    rb.p_elementary = elementary_success_prob(link);
    rb.expected_attempts = 1.0 / rb.p_elementary;
    rb.cc_delay_s = link.one_way_seconds();
    rb.expected_total_s = dist.mean();

    const int n_pairs = 2 * schedule.initial_pairs_per_link;
    rb.components.emplace_back(
        "elementary_generation",
        expected_parallel_wait(rb.p_elementary, n_pairs, t_att));
    RetrySpec no_tel = dv_retry_spec(schedule, link, TeleporterYield::trivial(), model);
    const double pair_time = lattice_wait(no_tel, t_att).mean();
    rb.components.emplace_back("pair_delivery", pair_time);
    rb.components.emplace_back("teleporter_retry", rb.expected_total_s - pair_time);

    double rate = 1.0 / rb.expected_total_s;
    if (model.normalize_per_mode) rate /= double(yield.num_modes);
    rb.pairs_per_second = rate;
    return rb;
}

inline RetrySpec cv_retry_spec(double p_link, double p_top, const ChannelSpec& link,
                               const RateModel& model = {}) {
    const double t_att = model.attempt_time(link);
    const double t_cc = link.one_way_seconds();
    const double t_e2e = 2.0 * link.one_way_seconds();
    RetrySpec link_wait = RetrySpec::geometric(p_link, t_att);
    RetrySpec cycle = RetrySpec::sum({RetrySpec::max_iid(std::move(link_wait), 2)}, t_cc);
    RetrySpec top = RetrySpec::restart(std::move(cycle), p_top);
    return RetrySpec::sum({std::move(top)}, t_e2e);
}

/// Closed-form expectation of the two-link CV repeater retry structure: both
/// links herald independently, a top-level failure restarts both.
inline RateBreakdown cv_repeater_rate(double p_link, double p_top,
                                      const ChannelSpec& link,
                                      const RateModel& model = {}) {
    if (p_link <= 0.0 || p_top <= 0.0)
        throw std::invalid_argument("cv_repeater_rate: vanishing herald probability");
    const double t_att = model.attempt_time(link);
    const double t_cc = link.one_way_seconds();
    const double t_e2e = 2.0 * link.one_way_seconds();
    const double links_wait = expected_parallel_wait(p_link, 2, t_att);
    const double total = (links_wait + t_cc) / p_top + t_e2e;

    RateBreakdown rb;
    rb.attempt_time_s = t_att;
    rb.p_elementary = p_link;
    rb.expected_attempts = 1.0 / p_link;
    rb.cc_delay_s = t_cc;
    rb.expected_total_s = total;
    rb.pairs_per_second = 1.0 / total;
    rb.components.emplace_back("link_heralds", links_wait);
    rb.components.emplace_back("top_level_restarts", (links_wait + t_cc) / p_top - links_wait);
    rb.components.emplace_back("end_to_end_cc", t_e2e);
    return rb;
}

}  // namespace qrep
