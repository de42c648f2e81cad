#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <random>

#include "qrep/fock.hpp"

using namespace qrep;

namespace {

double trace_distance(const Mat& a, const Mat& b) {
    Eigen::SelfAdjointEigenSolver<Mat> es(a - b, Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

double min_eigenvalue(const FockState& s) {
    Eigen::SelfAdjointEigenSolver<Mat> es(s.rho(), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

}  // namespace

TEST_CASE("tmsv basics") {
    SUBCASE("chi=0 is the two-mode vacuum") {
        FockState s = make_tmsv(TmsvParam(0.0), 5);
        CHECK(std::abs(s.element({0, 0}, {0, 0}).real() - 1.0) < 1e-14);
        CHECK(s.weight() == 1.0);
    }
    SUBCASE("chi=0.5 mean photon number per arm is 1/3") {
        FockState s = make_tmsv(TmsvParam(0.5), 15);
        CHECK(s.mean_photon(0) == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
        CHECK(s.mean_photon(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
        CHECK(std::abs(s.trace() - 1.0) < 1e-12);
    }
    SUBCASE("chi=0.9 cutoff 40 mean photon number") {
        FockState s = make_tmsv(TmsvParam(0.9), 40);
        CHECK(s.mean_photon(0) == doctest::Approx(4.26).epsilon(0.01 / 4.26));
    }
    SUBCASE("truncation warning when cutoff is too small") {
        TmsvBuildInfo info;
        make_tmsv(TmsvParam(0.9), 5, &info);
        CHECK(info.truncation_warning);
        make_tmsv(TmsvParam(0.5), 15, &info);
        CHECK_FALSE(info.truncation_warning);
    }
}

TEST_CASE("pure loss channel") {
    SUBCASE("single photon splits into diag(1-eta, eta)") {
        FockState s = FockState::fock(1, 3);
        const double eta = 0.3;
        FockState out = apply_loss(s, 0, eta);
        CHECK(out.element({0}, {0}).real() == doctest::Approx(1.0 - eta).epsilon(1e-12));
        CHECK(out.element({1}, {1}).real() == doctest::Approx(eta).epsilon(1e-12));
    }
    SUBCASE("eta=1 is the identity") {
        FockState s = make_tmsv(TmsvParam(0.5), 8);
        FockState out = apply_loss(s, 1, 1.0);
        CHECK(trace_distance(s.rho(), out.rho()) < 1e-12);
    }
    SUBCASE("trace preserved, positivity kept") {
        FockState s = make_tmsv(TmsvParam(0.6), 12);
        FockState out = apply_loss(s, 0, 0.4);
        CHECK(std::abs(out.trace() - 1.0) < 1e-10);
        CHECK(min_eigenvalue(out) > -1e-9);
        CHECK(out.weight() == 1.0);
    }
    SUBCASE("loss composition: eta1 then eta2 equals eta1*eta2") {
        FockState s = make_tmsv(TmsvParam(0.5), 12);
        FockState a = apply_loss(apply_loss(s, 1, 0.7), 1, 0.6);
        FockState b = apply_loss(s, 1, 0.42);
        CHECK(trace_distance(a.rho(), b.rho()) < 1e-10);
    }
    SUBCASE("loss on distinct modes commutes") {
        FockState s = make_tmsv(TmsvParam(0.5), 10);
        FockState a = apply_loss(apply_loss(s, 0, 0.7), 1, 0.3);
        FockState b = apply_loss(apply_loss(s, 1, 0.3), 0, 0.7);
        CHECK(trace_distance(a.rho(), b.rho()) < 1e-12);
    }
}

TEST_CASE("noiseless linear amplifier filter") {
    SUBCASE("gain 1 is the identity with unit herald") {
        FockState s = make_tmsv(TmsvParam(0.5), 10);
        auto out = apply_nla(s, 1, 1.0, 3);
        CHECK(out.p_success == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(trace_distance(s.rho(), out.state.rho()) < 1e-12);
    }
    SUBCASE("reference level sits at the nla cutoff") {
        // |1> with cutoff 1 reference passes untouched; |0> is damped by g^-2
        auto one = apply_nla(FockState::fock(1, 3), 0, 2.0, 1);
        CHECK(one.p_success == doctest::Approx(1.0).epsilon(1e-12));
        auto zero = apply_nla(FockState::fock(0, 3), 0, 2.0, 1);
        CHECK(zero.p_success == doctest::Approx(0.25).epsilon(1e-12));
    }
    SUBCASE("herald probability decreases with gain") {
        FockState s = apply_loss(make_tmsv(TmsvParam(0.5), 12), 1, 0.3);
        double prev = 1.0;
        for (double g : {1.5, 2.0, 3.0, 5.0}) {
            auto out = apply_nla(s, 1, g, 3);
            CHECK(out.p_success < prev);
            prev = out.p_success;
        }
    }
    SUBCASE("deamplification is rejected") {
        FockState s = make_tmsv(TmsvParam(0.5), 6);
        CHECK_THROWS_AS(apply_nla(s, 1, 0.5, 3), std::invalid_argument);
    }
}

TEST_CASE("beam splitter") {
    SUBCASE("single photon 50:50 interference") {
        FockState s = FockState::fock(1, 2);
        s.add_vacuum_mode(2);
        FockState out = apply_beamsplitter(s, 0, 1, 0.5);
        CHECK(out.element({1, 0}, {1, 0}).real() == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(out.element({0, 1}, {0, 1}).real() == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(std::abs(out.element({1, 0}, {0, 1})) == doctest::Approx(0.5).epsilon(1e-10));
    }
    SUBCASE("transmissivity 1 is the identity") {
        FockState s = make_tmsv(TmsvParam(0.5), 6);
        FockState out = apply_beamsplitter(s, 0, 1, 1.0);
        CHECK(trace_distance(s.rho(), out.rho()) < 1e-12);
    }
    SUBCASE("Hong-Ou-Mandel dip") {
        Mat rho = Mat::Zero(9, 9);
        rho(1 * 3 + 1, 1 * 3 + 1) = 1.0;
        FockState in = FockState::from_density(rho, {2, 2});
        FockState out = apply_beamsplitter(in, 0, 1, 0.5);
        CHECK(std::abs(out.element({1, 1}, {1, 1})) < 1e-12);
        CHECK(out.element({2, 0}, {2, 0}).real() == doctest::Approx(0.5).epsilon(1e-10));
    }
    SUBCASE("unitary: trace preserved with adequate cutoffs") {
        FockState s = make_tmsv(TmsvParam(0.5), 10);
        s.add_vacuum_mode(10);
        FockState out = apply_beamsplitter(s, 1, 2, 0.37);
        CHECK(std::abs(out.trace() - 1.0) < 1e-10);
        FockState back = apply_beamsplitter(out, 1, 2, 0.37, /*dagger=*/true);
        CHECK(trace_distance(back.rho(), s.rho()) < 1e-10);
    }
}

TEST_CASE("projection and partial trace") {
    SUBCASE("vacuum projects onto vacuum with unit herald") {
        FockState s = FockState::vacuum({2, 2});
        auto out = project_fock(s, 1, 0);
        CHECK(out.p_success == doctest::Approx(1.0));
        CHECK(out.state.num_modes() == 1);
    }
    SUBCASE("Born rule on a shared photon") {
        FockState s = FockState::fock(1, 2);
        s.add_vacuum_mode(2);
        FockState split = apply_beamsplitter(s, 0, 1, 0.5);
        auto out = project_fock(split, 1, 0);
        CHECK(out.p_success == doctest::Approx(0.5).epsilon(1e-10));
        CHECK(out.state.element({1}, {1}).real() == doctest::Approx(1.0).epsilon(1e-10));
    }
    SUBCASE("tmsv arm projected on vacuum leaves vacuum, herald 1-chi^2") {
        FockState s = make_tmsv(TmsvParam(0.5), 25);
        auto out = project_fock(s, 1, 0);
        CHECK(out.p_success == doctest::Approx(0.75).epsilon(1e-9));
        CHECK(out.state.element({0}, {0}).real() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(out.state.weight() == doctest::Approx(0.75).epsilon(1e-9));
    }
    SUBCASE("tmsv reduced state is thermal with matching mean photon number") {
        FockState s = make_tmsv(TmsvParam(0.5), 20);
        FockState red = partial_trace(s, {0});
        CHECK(red.num_modes() == 1);
        CHECK(red.mean_photon(0) == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
        // geometric photon statistics
        const double ratio = red.element({1}, {1}).real() / red.element({0}, {0}).real();
        CHECK(ratio == doctest::Approx(0.25).epsilon(1e-9));
        CHECK(std::abs(red.element({0}, {1})) < 1e-12);
    }
    SUBCASE("keeping all modes is the identity") {
        FockState s = make_tmsv(TmsvParam(0.5), 6);
        FockState same = partial_trace(s, {0, 1});
        CHECK(trace_distance(s.rho(), same.rho()) < 1e-14);
    }
    SUBCASE("product state reduction") {
        // mode 0 vacuum, mode 1 one photon
        Mat rho = Mat::Zero(9, 9);
        rho(0 * 3 + 1, 0 * 3 + 1) = 1.0;
        FockState prod = FockState::from_density(rho, {2, 2});
        FockState red = partial_trace(prod, {0});
        CHECK(red.element({0}, {0}).real() == doctest::Approx(1.0));
    }
}

TEST_CASE("truncation convergence of a lossy pipeline") {
    auto pipeline = [](int cutoff) {
        FockState s = make_tmsv(TmsvParam(0.5), cutoff);
        s = apply_loss(s, 1, 0.5);
        auto nla = apply_nla(s, 1, 1.5, std::min(3, cutoff));
        return nla.state;
    };
    FockState a = pipeline(15);
    FockState b = pipeline(20);
    // compare on the common support
    FockState bt = b;
    bt.resize_mode(0, 15);
    bt.resize_mode(1, 15);
    CHECK(trace_distance(a.rho(), bt.rho()) < 1e-6);
}

TEST_CASE("amplifier channel") {
    SUBCASE("trace preserving and vacuum becomes thermal") {
        FockState v = FockState::fock(0, 2);
        FockState out = apply_amplifier(v, 0, 1.5, 30);
        CHECK(std::abs(out.trace() - 1.0) < 1e-10);
        CHECK(out.mean_photon(0) == doctest::Approx(0.5).epsilon(1e-9));
    }
    SUBCASE("classical noise adds to the quadrature variance") {
        FockState v = FockState::fock(0, 2);
        FockState out = add_classical_noise(v, 0, 0.8);
        // <n> = noise/2 for an input vacuum
        CHECK(out.mean_photon(0) == doctest::Approx(0.4).epsilon(1e-8));
        CHECK(std::abs(out.trace() - 1.0) < 1e-9);
    }
}

TEST_CASE("argument validation") {
    FockState s = make_tmsv(TmsvParam(0.5), 5);
    CHECK_THROWS_AS(apply_loss(s, 3, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(apply_beamsplitter(s, 0, 0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(project_fock(s, 0, 9), std::invalid_argument);
    CHECK_THROWS_AS(partial_trace(s, {}), std::invalid_argument);
    CHECK_THROWS_AS(make_tmsv(TmsvParam(0.5), 0), std::invalid_argument);
    CHECK_THROWS_AS(TmsvParam(1.0), std::invalid_argument);
}
