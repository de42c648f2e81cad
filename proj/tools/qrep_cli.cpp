// Command-line front end: DV vs CV repeater rate comparison for two-mode
// squeezed vacuum distribution.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "qrep/compare.hpp"

namespace {

using namespace qrep;

struct CliOptions {
    ComparisonConfig cfg;
    std::string formula = "oracle";
    std::string output;  // empty: CSV to stdout
    double grid_start = 0.60, grid_stop = 1.00, grid_step = 0.01;
    bool custom_grid = false;
};

void add_common_options(CLI::App* app, CliOptions& o) {
    app->add_option("--chi", o.cfg.chi, "Squeezing parameter of the input state")
        ->check(CLI::Range(0.0, 0.999));
    app->add_option("--total-length-km", o.cfg.total_length_km, "End-to-end fiber length");
    app->add_option("--attenuation-db-per-km", o.cfg.attenuation_db_per_km,
                    "Fiber attenuation");
    app->add_option("--f-required", o.cfg.f_required,
                    "Required fidelity of the delivered pair; negative = solve from the "
                    "CV entanglement target (single-mode teleporter only)");
    app->add_option("--cv-eof-target", o.cfg.cv_eof_target,
                    "Output entanglement of formation the CV repeater must reach; "
                    "negative = take the DV output value (single-mode teleporter only)");
    app->add_option("--num-modes", o.cfg.num_modes,
                    "Teleporter mode count (1, 2, 4, 8); negative = choose from the "
                    "mean photon number");
    app->add_option("--bsm-success-prob", o.cfg.bsm_success_prob,
                    "Linear-optics Bell measurement success probability")
        ->check(CLI::Range(1e-9, 1.0));
    app->add_option("--purification-formula", o.formula,
                    "Two-copy purification recurrence: 'oracle' (circuit-verified) or "
                    "'as-printed' (published variant)")
        ->check(CLI::IsMember({"oracle", "as-printed"}));
    app->add_option("--fock-cutoff", o.cfg.fock_cutoff, "Fock truncation; negative = per-chi default");
    app->add_option("--nla-cutoff", o.cfg.nla_cutoff, "NLA reference level; negative = per-chi default");
    app->add_option("--source-rep-rate-hz", o.cfg.source_rep_rate_hz,
                    "Attempt clock for zero-length channels");
    app->add_flag("--normalize-per-mode,!--no-normalize-per-mode", o.cfg.normalize_per_mode,
                  "Divide the DV rate by the teleporter mode count");
    app->add_option("--seed", o.cfg.seed, "Seed for Monte Carlo cross-checks");
    app->set_config("--config", "", "Key-value config file; flags override it");
}

ComparisonConfig finalize(CliOptions& o) {
    o.cfg.purification_formula =
        o.formula == "oracle" ? PurifyFormula::Standard : PurifyFormula::AsPrinted;
    if (o.custom_grid) {
        o.cfg.f_initial_grid.clear();
        for (double f = o.grid_start; f <= o.grid_stop + 1e-12; f += o.grid_step)
            o.cfg.f_initial_grid.push_back(std::min(f, 1.0));
    }
    return o.cfg;
}

void print_breakdown(const RateBreakdown& rb) {
    std::printf("rate_hz: %.10g\n", rb.pairs_per_second);
    std::printf("expected_total_s: %.10g\n", rb.expected_total_s);
    std::printf("attempt_time_s: %.10g\n", rb.attempt_time_s);
    std::printf("p_elementary: %.10g\n", rb.p_elementary);
    std::printf("expected_attempts: %.10g\n", rb.expected_attempts);
    std::printf("cc_delay_s: %.10g\n", rb.cc_delay_s);
    for (const auto& [stage, seconds] : rb.components)
        std::printf("component.%s_s: %.10g\n", stage.c_str(), seconds);
}

int run_compare(CliOptions& o) {
    ComparisonConfig cfg = finalize(o);
    ComparisonResult res = run_comparison(cfg);
    const std::string csv = to_csv(res);
    if (o.output.empty()) {
        std::fputs(csv.c_str(), stdout);
    } else {
        std::ofstream f(o.output, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open output file: " + o.output);
        f << csv;
    }
    std::fputs(summarize(res).c_str(), stdout);
    return 0;
}

int run_dv_rate(CliOptions& o, double f_initial) {
    ComparisonConfig cfg = finalize(o);
    if (cfg.f_required < 0.0)
        throw InfeasibleConfig("dv-rate: --f-required must be given explicitly");
    TmsvParam param(cfg.chi);
    const int nm = cfg.num_modes > 0 ? cfg.num_modes : choose_mode_count(param);
    auto sched = solve_schedule(f_initial, cfg.f_required, 2, cfg.purification_formula);
    if (!sched.feasible)
        throw InfeasibleConfig("dv-rate: purification cannot reach the required fidelity; "
                               "fixed point " + std::to_string(sched.fixed_point));
    auto endpoint = detail::evaluate_dv_endpoint(cfg.chi, cfg.f_required, nm,
                                                 cfg.bsm_success_prob, cfg.fock_cutoff);
    RateBreakdown rb = dv_repeater_rate(sched, cfg.total_channel().half(), endpoint.yield,
                                        cfg.rate_model());
    std::printf("num_modes: %d\n", nm);
    std::printf("rounds: %d\n", sched.rounds);
    std::printf("f_after_purification: %.10g\n", sched.fidelity_trajectory.back());
    std::printf("f_after_swap: %.10g\n", sched.final_fidelity_after_swap);
    std::printf("teleporter_p_attempt: %.10g\n", endpoint.yield.per_attempt());
    if (endpoint.eof_exact) std::printf("dv_eof: %.10g\n", endpoint.eof);
    print_breakdown(rb);
    return 0;
}

int run_cv_rate(CliOptions& o, double gain, double top_gain) {
    ComparisonConfig cfg = finalize(o);
    TmsvParam param(cfg.chi);
    const ChannelSpec total = cfg.total_channel();
    CvRepeaterOutput out;
    double used_gain = gain, used_top = top_gain;
    if (gain > 0.0) {
        CvLinkConfig lc = CvLinkConfig::for_chi(cfg.chi, total.half(), gain);
        lc.top_gain = top_gain;
        if (cfg.nla_cutoff > 0) lc.nla_cutoff = cfg.nla_cutoff;
        if (cfg.fock_cutoff > 0) lc.fock_cutoff = cfg.fock_cutoff;
        used_top = lc.effective_top_gain();
        out = run_two_link_repeater(lc);
    } else {
        if (cfg.cv_eof_target < 0.0)
            throw InfeasibleConfig("cv-rate: give --gain or --cv-eof-target");
        GainOptimum opt = optimize_gain(param, total, cfg.cv_eof_target, cfg.rate_model(),
                                        cfg.nla_cutoff, cfg.fock_cutoff);
        if (!opt.feasible)
            throw InfeasibleConfig("cv-rate: target EoF unreachable; best achievable " +
                                   std::to_string(opt.max_achievable_eof));
        out = opt.output;
        used_gain = opt.gain;
        used_top = opt.top_gain;
    }
    RateBreakdown rb = cv_repeater_rate(out.p_link, out.p_top, total.half(), cfg.rate_model());
    std::printf("gain: %.10g\n", used_gain);
    std::printf("top_gain: %.10g\n", used_top);
    std::printf("p_link: %.10g\n", out.p_link);
    std::printf("p_top: %.10g\n", out.p_top);
    std::printf("cv_eof: %.10g (gaussian moment-matched)\n", out.eof.eof);
    std::printf("log_negativity: %.10g\n", out.eof.log_negativity);
    print_breakdown(rb);
    return 0;
}

int run_validate(CliOptions& o) {
    ComparisonConfig cfg = finalize(o);
    int failures = 0;
    auto report = [&](const char* name, bool ok) {
        std::printf("%-44s %s\n", name, ok ? "pass" : "FAIL");
        if (!ok) ++failures;
    };

    {  // recurrence fixed points
        bool ok = std::abs(swap_fidelity(1.0) - 1.0) < 1e-15 &&
                  std::abs(swap_fidelity(0.25) - 0.25) < 1e-15 &&
                  std::abs(purify(1.0).fidelity - 1.0) < 1e-15 &&
                  std::abs(purify(0.25).fidelity - 0.25) < 1e-14 &&
                  std::abs(purify(0.25).p_success - 0.5) < 1e-14;
        report("recurrence fixed points", ok);
    }
    {  // fock vs gaussian moments for tmsv through loss
        bool ok = true;
        for (double eta : {0.1, 0.5, 0.9}) {
            FockState s = apply_loss(make_tmsv(TmsvParam(0.5), 30), 1, eta);
            TwoModeCovariance num = fock_two_mode_summary(s);
            TwoModeCovariance ana = loss_map(tmsv_covariance(TmsvParam(0.5)), 1, eta);
            ok = ok && (num.cov - ana.cov).cwiseAbs().maxCoeff() < 1e-6 &&
                 num.mean.cwiseAbs().maxCoeff() < 1e-9;
        }
        report("fock/gaussian moment cross-check", ok);
    }
    {  // monte carlo vs closed form, parallel pair generation
        bool ok = true;
        for (double p : {0.1, 0.5, 1.0}) {
            RetrySpec spec = RetrySpec::max_iid(RetrySpec::geometric(p, 1.0), 2);
            auto mc = monte_carlo_wait(spec, 20000, cfg.seed);
            const double exact = expected_parallel_wait(p, 2, 1.0);
            ok = ok && std::abs(mc.mean_s - exact) < 4.0 * std::max(mc.stderr_s, 1e-12);
        }
        report("waiting-time monte carlo cross-check", ok);
    }
    {  // lattice evaluation agrees with the closed form
        bool ok = true;
        for (double p : {0.1, 0.5, 1.0}) {
            RetrySpec spec = RetrySpec::max_iid(RetrySpec::geometric(p, 1.0), 2);
            const double lat = lattice_wait(spec, 1.0).mean();
            const double exact = (3.0 - 2.0 * p) / (p * (2.0 - p));
            ok = ok && std::abs(lat - exact) < 1e-6 * exact;
        }
        report("lattice waiting-time closed form", ok);
    }
    {  // nla identity at gain 1
        FockState s = apply_loss(make_tmsv(TmsvParam(0.5), 15), 1, 0.5);
        auto nla = apply_nla(s, 1, 1.0, 3);
        bool ok = std::abs(nla.p_success - 1.0) < 1e-12 &&
                  (nla.state.rho() - s.rho()).cwiseAbs().maxCoeff() < 1e-12;
        report("nla gain-1 identity", ok);
    }
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DV vs CV quantum repeater rate comparison"};
    app.require_subcommand(1);
    // common options live on the top-level app so the config file machinery
    // sees them; fallthrough lets them appear after the subcommand too
    app.fallthrough();

    CliOptions o;
    double f_initial = 0.8, gain = -1.0, top_gain = -1.0;
    add_common_options(&app, o);

    CLI::App* compare = app.add_subcommand("compare", "Sweep the initial fidelity grid");
    compare->add_option("--output,-o", o.output, "CSV output path (default: stdout)");
    auto* gs = compare->add_option("--grid-start", o.grid_start, "First grid fidelity");
    auto* ge = compare->add_option("--grid-stop", o.grid_stop, "Last grid fidelity");
    auto* gp = compare->add_option("--grid-step", o.grid_step, "Grid spacing");
    compare->callback([&] {
        o.custom_grid = gs->count() || ge->count() || gp->count();
    });

    CLI::App* dv = app.add_subcommand("dv-rate", "DV pipeline at one initial fidelity");
    dv->add_option("--f-initial", f_initial, "Initial pair fidelity")->required();

    CLI::App* cv = app.add_subcommand("cv-rate", "CV pipeline at a fixed or optimized gain");
    cv->add_option("--gain", gain, "NLA gain; negative = optimize against --cv-eof-target");
    cv->add_option("--top-gain", top_gain,
                   "Second-level NLA gain; negative = same as --gain");

    CLI::App* val = app.add_subcommand("validate", "Run the built-in oracle cross-checks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (compare->parsed()) return run_compare(o);
        if (dv->parsed()) return run_dv_rate(o, f_initial);
        if (cv->parsed()) return run_cv_rate(o, gain, top_gain);
        if (val->parsed()) return run_validate(o);
    } catch (const qrep::InfeasibleConfig& e) {
        std::fprintf(stderr, "infeasible configuration: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "invalid configuration: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
