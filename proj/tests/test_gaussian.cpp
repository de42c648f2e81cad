#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qrep/gaussian.hpp"

using namespace qrep;

TEST_CASE("symplectic eigenvalues") {
    SUBCASE("vacuum and pure TMSV sit on the physical boundary") {
        TwoModeCovariance vac;
        Eigen::Vector2d nu = symplectic_eigenvalues(vac.cov);
        CHECK(nu(0) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(nu(1) == doctest::Approx(1.0).epsilon(1e-12));
        for (double chi : {0.1, 0.5, 0.9}) {
            CAPTURE(chi);
            nu = symplectic_eigenvalues(tmsv_covariance(TmsvParam(chi)).cov);
            CHECK(nu(0) == doctest::Approx(1.0).epsilon(1e-9));
            CHECK(nu(1) == doctest::Approx(1.0).epsilon(1e-9));
            CHECK(is_physical(tmsv_covariance(TmsvParam(chi))));
        }
    }
    SUBCASE("thermal state has eigenvalue 2 nbar + 1") {
        TwoModeCovariance s;
        s.cov.diagonal() << 3.0, 3.0, 1.0, 1.0;  // nbar = 1 on mode 0
        Eigen::Vector2d nu = symplectic_eigenvalues(s.cov);
        CHECK(nu(0) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(nu(1) == doctest::Approx(3.0).epsilon(1e-12));
    }
    SUBCASE("scaling below vacuum is unphysical") {
        TwoModeCovariance s;
        s.cov *= 0.9;
        CHECK_FALSE(is_physical(s));
    }
}

TEST_CASE("tmsv covariance entries") {
    const double chi = 0.5;
    TwoModeCovariance s = tmsv_covariance(TmsvParam(chi));
    const double a = (1.0 + chi * chi) / (1.0 - chi * chi);
    const double c = 2.0 * chi / (1.0 - chi * chi);
    CHECK(s.cov(0, 0) == doctest::Approx(a));
    CHECK(s.cov(1, 1) == doctest::Approx(a));
    CHECK(s.cov(0, 2) == doctest::Approx(c));
    CHECK(s.cov(1, 3) == doctest::Approx(-c));
    // diagonal variance encodes the mean photon number: a = 2 nbar + 1
    CHECK(0.5 * (a - 1.0) == doctest::Approx(TmsvParam(chi).mean_photon()));
}

TEST_CASE("loss map") {
    TwoModeCovariance tmsv = tmsv_covariance(TmsvParam(0.5));
    SUBCASE("eta = 1 is the identity") {
        TwoModeCovariance out = loss_map(tmsv, 1, 1.0);
        CHECK((out.cov - tmsv.cov).cwiseAbs().maxCoeff() < 1e-14);
    }
    SUBCASE("eta = 0 resets the arm to vacuum and kills correlations") {
        TwoModeCovariance out = loss_map(tmsv, 1, 0.0);
        CHECK(out.cov(2, 2) == doctest::Approx(1.0));
        CHECK(out.cov(3, 3) == doctest::Approx(1.0));
        CHECK(std::abs(out.cov(0, 2)) < 1e-14);
    }
    SUBCASE("losses compose multiplicatively") {
        TwoModeCovariance ab = loss_map(loss_map(tmsv, 1, 0.7), 1, 0.6);
        TwoModeCovariance once = loss_map(tmsv, 1, 0.42);
        CHECK((ab.cov - once.cov).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("output stays physical") {
        for (double eta : {0.1, 0.5, 0.9})
            CHECK(is_physical(loss_map(tmsv, 1, eta)));
    }
    SUBCASE("argument validation") {
        CHECK_THROWS_AS(loss_map(tmsv, 2, 0.5), std::invalid_argument);
        CHECK_THROWS_AS(loss_map(tmsv, 1, 1.5), std::invalid_argument);
    }
}

TEST_CASE("EPR noise of teleportation resources") {
    SUBCASE("pure TMSV: 2(1-chi)/(1+chi) per quadrature") {
        for (double chi : {0.1, 0.5, 0.9}) {
            CAPTURE(chi);
            auto [nx, np] = epr_noise(tmsv_covariance(TmsvParam(chi)));
            const double expect = 2.0 * (1.0 - chi) / (1.0 + chi);
            CHECK(nx == doctest::Approx(expect).epsilon(1e-12));
            CHECK(np == doctest::Approx(expect).epsilon(1e-12));
        }
    }
    SUBCASE("two-mode vacuum: two vacuum units") {
        auto [nx, np] = epr_noise(TwoModeCovariance{});
        CHECK(nx == doctest::Approx(2.0));
        CHECK(np == doctest::Approx(2.0));
    }
    SUBCASE("unity-gain teleportation adds exactly the EPR noise") {
        TwoModeCovariance input = tmsv_covariance(TmsvParam(0.5));
        TwoModeCovariance resource = loss_map(tmsv_covariance(TmsvParam(0.7)), 1, 0.8);
        auto [nx, np] = epr_noise(resource, 0);
        TwoModeCovariance out = cv_teleport(input, 1, resource, 0);
        CHECK(out.cov(2, 2) == doctest::Approx(input.cov(2, 2) + nx).epsilon(1e-12));
        CHECK(out.cov(3, 3) == doctest::Approx(input.cov(3, 3) + np).epsilon(1e-12));
        CHECK(out.cov(0, 2) == doctest::Approx(input.cov(0, 2)).epsilon(1e-12));
    }
}

TEST_CASE("teleport channel with feedforward gain") {
    SUBCASE("unity gain recovers the plain EPR noise") {
        TwoModeCovariance resource = tmsv_covariance(TmsvParam(0.5));
        auto [nx, np] = epr_noise(resource);
        TeleportChannel ch = teleport_channel(resource, 0, 1.0);
        CHECK(ch.noise_x == doctest::Approx(nx).epsilon(1e-12));
        CHECK(ch.noise_p == doctest::Approx(np).epsilon(1e-12));
    }
    SUBCASE("tuned gain through a pure TMSV is a pure-loss channel") {
        for (double chi : {0.2, 0.5, 0.8}) {
            CAPTURE(chi);
            TeleportChannel ch = tuned_teleport_channel(tmsv_covariance(TmsvParam(chi)), 0);
            CHECK(ch.gain == doctest::Approx(chi).epsilon(1e-12));
            // total noise equals what a transmittance gain^2 loss channel adds
            const double loss_noise = 1.0 - ch.gain * ch.gain;
            CHECK(ch.noise_x == doctest::Approx(loss_noise).epsilon(1e-12));
            CHECK(ch.noise_p == doctest::Approx(loss_noise).epsilon(1e-12));
        }
    }
    SUBCASE("tuned gain never has less noise headroom than unity gain") {
        TwoModeCovariance resource = loss_map(tmsv_covariance(TmsvParam(0.5)), 1, 0.3);
        TeleportChannel tuned = tuned_teleport_channel(resource, 0);
        TeleportChannel unity = teleport_channel(resource, 0, 1.0);
        const double excess_tuned =
            0.5 * (tuned.noise_x + tuned.noise_p) - std::abs(1.0 - tuned.gain * tuned.gain);
        const double excess_unity = 0.5 * (unity.noise_x + unity.noise_p);
        CHECK(excess_tuned <= excess_unity + 1e-12);
        CHECK(excess_tuned >= -1e-12);
    }
    SUBCASE("fock-side application matches a direct loss channel for pure resources") {
        const double chi_res = 0.6;
        TeleportChannel ch = tuned_teleport_channel(tmsv_covariance(TmsvParam(chi_res)), 0);
        FockState in = make_tmsv(TmsvParam(0.5), 12);
        FockState teleported = apply_teleport_channel(in, 1, ch);
        FockState direct = apply_loss(in, 1, chi_res * chi_res);
        CHECK((teleported.rho() - direct.rho()).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("fock moment extraction matches gaussian analytics") {
    SUBCASE("TMSV through loss at several transmittances") {
        for (double eta : {0.1, 0.5, 0.9}) {
            CAPTURE(eta);
            FockState s = apply_loss(make_tmsv(TmsvParam(0.5), 25), 1, eta);
            TwoModeCovariance num = fock_two_mode_summary(s);
            TwoModeCovariance ana = loss_map(tmsv_covariance(TmsvParam(0.5)), 1, eta);
            CHECK((num.cov - ana.cov).cwiseAbs().maxCoeff() < 1e-6);
            CHECK(num.mean.cwiseAbs().maxCoeff() < 1e-9);
        }
    }
    SUBCASE("classical noise raises the diagonal only") {
        FockState s = make_tmsv(TmsvParam(0.4), 14);
        TwoModeCovariance before = fock_two_mode_summary(s);
        FockState noisy = add_classical_noise(s, 1, 0.8);
        TwoModeCovariance after = fock_two_mode_summary(noisy);
        CHECK(after.cov(2, 2) == doctest::Approx(before.cov(2, 2) + 0.8).epsilon(1e-6));
        CHECK(after.cov(3, 3) == doctest::Approx(before.cov(3, 3) + 0.8).epsilon(1e-6));
        CHECK(after.cov(0, 2) == doctest::Approx(before.cov(0, 2)).epsilon(1e-6));
    }
    SUBCASE("two modes are required") {
        FockState one = FockState::vacuum({5});
        CHECK_THROWS_AS(fock_two_mode_summary(one), std::invalid_argument);
    }
}
