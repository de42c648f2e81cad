#pragma once

#include <cmath>
#include <future>
#include <optional>
#include <stdexcept>
#include <vector>

#include "qrep/common.hpp"
#include "qrep/entanglement.hpp"
#include "qrep/fock.hpp"
#include "qrep/gaussian.hpp"
#include "qrep/rate.hpp"

namespace qrep {

struct CvLinkConfig {
    TmsvParam chi{0.5};
    ChannelSpec link;          // one repeater segment (half the total distance)
    double gain = 1.0;         // NLA gain on each link
    double top_gain = -1.0;    // second-level NLA gain; < 0 means "same as gain"
    int nla_cutoff = 3;
    int top_nla_cutoff = -1;   // < 0 means "same as nla_cutoff"
    int fock_cutoff = 15;

    double effective_top_gain() const { return top_gain < 0.0 ? gain : top_gain; }
    int effective_top_cutoff() const { return top_nla_cutoff < 0 ? nla_cutoff : top_nla_cutoff; }

    static int default_nla_cutoff(double chi) { return chi <= 0.5 ? 3 : 8; }
    static int default_fock_cutoff(double chi) { return chi <= 0.5 ? 15 : 40; }

    static CvLinkConfig for_chi(double chi, const ChannelSpec& link, double gain = 1.0) {
        CvLinkConfig c{TmsvParam(chi), link, gain, -1.0,
                       default_nla_cutoff(chi), -1, default_fock_cutoff(chi)};
        return c;
    }
};

struct EcLinkResult {
    FockState state;       // mode 0: retained arm, mode 1: corrected traveling arm
    double p_success = 1.0;
};

/// One error-corrected link: TMSV source, loss on the traveling arm, heralded
/// NLA on the same arm.
inline EcLinkResult run_ec_link(const CvLinkConfig& cfg) {
    if (cfg.gain < 1.0) throw std::invalid_argument("run_ec_link: gain must be >= 1");
    FockState s = make_tmsv(cfg.chi, cfg.fock_cutoff);
    s = apply_loss(s, 1, cfg.link.transmittance());
    auto nla = apply_nla(s, 1, cfg.gain, cfg.nla_cutoff);
    return {std::move(nla.state), std::min(1.0, nla.p_success)};
}

struct CvRepeaterOutput {
    FockState joint_state;       // two modes spanning the full channel
    TwoModeCovariance cov;       // moment summary of joint_state
    double p_link = 1.0;         // per-link NLA herald probability
    double p_top = 1.0;          // second-level NLA herald probability
    EntanglementReport eof;      // gaussian-approx policy
};

/// Joins two identical heralded links at the middle node by CV teleportation
/// with excess-noise-minimal feedforward gain, then applies the second-level
/// NLA on the delivered arm. The teleportation hand-off uses the
/// moment-matched effective channel of the second link's resource state
/// (measured arm: its retained one).
inline CvRepeaterOutput compose_links(const EcLinkResult& link, const CvLinkConfig& cfg) {
    TwoModeCovariance link_cov = fock_two_mode_summary(link.state);
    TeleportChannel ch = tuned_teleport_channel(link_cov, /*measured_arm=*/0);
    FockState joint = apply_teleport_channel(link.state, 1, ch);

    CvRepeaterOutput out;
    out.p_link = link.p_success;
    const double g_top = cfg.effective_top_gain();
    if (g_top > 1.0) {
        const int top_cut = std::min(cfg.effective_top_cutoff(), joint.cutoff(1));
        auto nla = apply_nla(joint, 1, g_top, top_cut);
        out.joint_state = std::move(nla.state);
        out.p_top = std::min(1.0, nla.p_success);
    } else {
        out.joint_state = std::move(joint);
        out.p_top = 1.0;
    }
    out.cov = fock_two_mode_summary(out.joint_state);
    out.eof = eof_gaussian_ppt(out.cov);
    out.eof.gaussian_approx = true;
    return out;
}

inline CvRepeaterOutput run_two_link_repeater(const CvLinkConfig& cfg) {
    return compose_links(run_ec_link(cfg), cfg);  // both links are identical
}

struct GainOptimum {
    bool feasible = false;
    double gain = 1.0;
    double top_gain = 1.0;
    double rate_hz = 0.0;
    double max_achievable_eof = 0.0;
    CvRepeaterOutput output;
};

/// Maximizes the repeater rate over the link and top-level NLA gains subject
/// to a minimum output entanglement of formation. Geometric grid scan over
/// both gains (the rate landscape at fixed EoF is a broad plateau, so grid
/// resolution dominates nothing); link states are built once per link gain
/// and the scan over link gains runs in parallel.
inline GainOptimum optimize_gain(const TmsvParam& chi, const ChannelSpec& total,
                                 double eof_target, const RateModel& model = {},
                                 int nla_cutoff = -1, int fock_cutoff = -1,
                                 double gain_max = 64.0, double top_gain_max = 256.0) {
    ChannelSpec link_spec = total.half();
    auto make_cfg = [&](double g, double gt) {
        CvLinkConfig c = CvLinkConfig::for_chi(chi.chi, link_spec, g);
        c.top_gain = gt;
        if (nla_cutoff > 0) c.nla_cutoff = nla_cutoff;
        if (fock_cutoff > 0) c.fock_cutoff = fock_cutoff;
        return c;
    };
    // heavier Fock cutoffs get a coarser grid
    const int cut = fock_cutoff > 0 ? fock_cutoff
                                    : CvLinkConfig::default_fock_cutoff(chi.chi);
    const double step = cut <= 20 ? std::pow(2.0, 0.25) : 2.0;
    auto geometric = [&](double maxv) {
        std::vector<double> v{1.0};
        for (double g = step; g <= maxv * 1.0001; g *= step) v.push_back(g);
        return v;
    };
    const std::vector<double> gains = geometric(gain_max);
    const std::vector<double> top_gains = geometric(top_gain_max);

    struct Candidate {
        double gain = 1.0, top_gain = 1.0, rate = 0.0;
        CvRepeaterOutput out;
    };
    auto scan_link_gain = [&](double g) {
        std::vector<Candidate> cands;
        EcLinkResult link = run_ec_link(make_cfg(g, 1.0));
        for (double gt : top_gains) {
            Candidate c{g, gt, 0.0, compose_links(link, make_cfg(g, gt))};
            c.rate = cv_repeater_rate(c.out.p_link, c.out.p_top, link_spec, model)
                         .pairs_per_second;
            cands.push_back(std::move(c));
        }
        return cands;
    };

    GainOptimum best;
    const std::size_t batch = 4;  // bounds peak memory at large cutoffs
    for (std::size_t base = 0; base < gains.size(); base += batch) {
        std::vector<std::future<std::vector<Candidate>>> futures;
        for (std::size_t i = base; i < std::min(base + batch, gains.size()); ++i)
            futures.push_back(std::async(std::launch::async, scan_link_gain, gains[i]));
        for (auto& f : futures)
            for (Candidate& c : f.get()) {
                best.max_achievable_eof = std::max(best.max_achievable_eof, c.out.eof.eof);
                if (c.out.eof.eof < eof_target) continue;
                if (!best.feasible || c.rate > best.rate_hz) {
                    best.feasible = true;
                    best.gain = c.gain;
                    best.top_gain = c.top_gain;
                    best.rate_hz = c.rate;
                    best.output = std::move(c.out);
                }
            }
    }
    return best;
}

}  // namespace qrep
