#include "test_support.hpp"

#include "ulamcert/certify.hpp"
#include "ulamcert/error.hpp"
#include "ulamcert/kl.hpp"

#include "doctest.h"

#include <cmath>

using namespace ulamcert;
using namespace testsupport;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::kInvalidArgument;
}

CertificationReport table1_like_report() {
    CertificationReport rep;
    rep.status = CertificationStatus::kCertified;
    rep.ell = Rational(1, 25);
    rep.delta_com = Rational(1, 26);
    rep.epsilon_com = Rational(1, 5000);
    rep.hole_bound = Rational(10, 9) * Rational(1, 5000);
    rep.theorem2_coefficient = 1.0 + (4.0 / 9.0) / (1.0 - 0.04 - 1.0 / 3.0);
    return rep;
}

}  // namespace

TEST_SUITE("certify") {
    TEST_CASE("separation check") {
        using C = std::complex<double>;
        const double r = 0.96, d = 0.01;
        CHECK(separation_check({C(1.0)}, r, d).pass);
        const SeparationResult near = separation_check({C(1.0), C(0.985)}, r, d);
        CHECK_FALSE(near.pass);
        REQUIRE(near.witness.has_value());
        CHECK(near.witness->real() == 0.985);
        CHECK(separation_check({C(1.0), C(0.975)}, r, d).pass);
        CHECK(separation_check({C(1.0), C(0.5)}, r, d).pass);
        const SeparationResult cl = separation_check({C(1.0), C(0.995)}, r, d);
        CHECK(cl.pass);
        CHECK(cl.cluster.size() == 2);
    }

    TEST_CASE("candidate meshes") {
        const auto c = candidate_bins(100000);
        CHECK(c.front() == 1);
        CHECK(c.back() == 100000);
        CHECK(std::is_sorted(c.begin(), c.end()));
        CHECK(bins_for_mesh_bound(1.26e-5, 5000, c) == 100000);
        CHECK(bins_for_mesh_bound(2.4e-4, 1000, c) == 5000);
        CHECK(bins_for_mesh_bound(1e-9, 1000, c) == 0);
    }

    TEST_CASE("bootstrap plan at the coarse mesh") {
        const LYConstants h = ly_constants(Rational(1, 9), Rational(2, 9), LyMode::kHoleUniform);
        const LYConstants c = ly_constants(Rational(1, 9), Rational(2, 9), LyMode::kClosedOnly);
        const auto cands = candidate_bins();
        const MeshPlan p = refine_with_bootstrap(h, c, 0.975, 1.0 / 41.0, 63.73181657, 5000, cands);
        CHECK(p.bootstrap_used);
        CHECK(p.n_bins == 100000);
        REQUIRE(p.predicted.has_value());
        CHECK(p.predicted->n2 == 11);
        CHECK(p.bootstrap->transferred_bound == doctest::Approx(1048.2987275376086).epsilon(1e-12));

        const MeshPlan fallback = refine_with_bootstrap(h, c, 0.975, 1.0 / 41.0, 63.73181657, 1000, cands);
        CHECK_FALSE(fallback.bootstrap_used);
        CHECK(fallback.bootstrap_attempted);
        CHECK(fallback.n_bins == 2000);

        const MeshPlan reuse = refine_with_bootstrap(h, c, 0.975, 1.0 / 41.0, 63.73181657, 1000000, cands);
        CHECK(reuse.bootstrap_used);
        CHECK(reuse.n_bins == 1000000);
    }

    TEST_CASE("certificate consequences") {
        const CertificationReport rep = table1_like_report();
        CHECK(rep.theorem2_coefficient == doctest::Approx(1.7092198581560283).epsilon(1e-14));
        const CertificateBounds at = certificate_bounds(rep, Rational(1, 4500));
        CHECK(at.accim_exists);
        CHECK(at.one_minus_eH_upper == doctest::Approx(1.7092198581560283 / 4500.0).epsilon(1e-14));
        CHECK(at.escape_upper == doctest::Approx(-std::log1p(-1.7092198581560283 / 4500.0)).epsilon(1e-14));
        CHECK_FALSE(certificate_bounds(rep, Rational(1, 2)).accim_exists);
        CHECK(certificate_bounds(rep, Rational(1, 2)).one_minus_eH_upper == doctest::Approx(1.0 / 26.0));
        const CertificateBounds zero = certificate_bounds(rep, 0);
        CHECK(zero.accim_exists);
        CHECK(zero.one_minus_eH_upper == 0.0);
        CHECK(zero.escape_upper == 0.0);
        CertificationReport failed;
        CHECK(code_of([&] { certificate_bounds(failed, 0); }) == ErrorCode::kPrecondition);
    }

    TEST_CASE("tenfold map certifies and every logged step is reproducible") {
        CertificationConfig cfg;
        cfg.ell = Rational(1, 25);
        cfg.bins_init = 100;
        const CertificationReport rep = run_certification(tenfold_map(), cfg);
        REQUIRE(rep.certified());
        CHECK(rep.delta_com == Rational(1, 26));
        CHECK(rep.hole_bound == Rational(11, 10) * rep.epsilon_com);
        const LYConstants ly = ly_constants(Rational(1, 10), 0, LyMode::kHoleUniform);
        std::int64_t prev_bins = 0;
        for (const IterationRecord& rec : rep.iterations) {
            CHECK(rec.n_bins > prev_bins);
            prev_bins = rec.n_bins;
            CHECK(boost::multiprecision::numerator(rec.delta) == 1);
            const KLConstants again = kl_constants(ly, 0.96, to_double(rec.delta), rec.H);
            CHECK(again.scaled_epsilon0 == rec.kl.scaled_epsilon0);
            CHECK(rec.step7_pass == (to_double(rec.mesh) <= again.scaled_epsilon0));
        }
        const IterationRecord& last = rep.iterations.back();
        CHECK(last.outcome == "certified");
        CHECK(to_double(rep.epsilon_com) <= last.kl.scaled_epsilon0);
        CHECK(rep.iterations.front().outcome == "reduce epsilon");
    }

    TEST_CASE("iteration caps end in a failed report") {
        CertificationConfig cfg;
        cfg.ell = Rational(1, 25);
        cfg.bins_init = 100;
        cfg.max_inner = 1;
        const CertificationReport rep = run_certification(tenfold_map(), cfg);
        CHECK_FALSE(rep.certified());
        CHECK_FALSE(rep.reason.empty());
        CHECK(rep.iterations.size() == 1);

        CertificationConfig tiny = cfg;
        tiny.max_inner = 12;
        tiny.max_bins = 200;
        const CertificationReport capped = run_certification(tenfold_map(), tiny);
        CHECK_FALSE(capped.certified());
        CHECK(capped.reason.find("exceeded") != std::string::npos);
    }

    TEST_CASE("input validation") {
        CertificationConfig cfg;
        cfg.ell = Rational(1, 25);
        CHECK(code_of([&] { run_certification(doubling_map(), cfg); }) == ErrorCode::kMode);
        cfg.ell = Rational(7, 10);
        CHECK(code_of([&] { run_certification(tenfold_map(), cfg); }) == ErrorCode::kDomain);
        cfg.ell = Rational(1, 25);
        cfg.delta_init = Rational(2, 53);
        CHECK(code_of([&] { run_certification(tenfold_map(), cfg); }) == ErrorCode::kInvalidArgument);
        cfg.delta_init = Rational(1, 20);
        CHECK(code_of([&] { run_certification(tenfold_map(), cfg); }) == ErrorCode::kInvalidArgument);
    }

    TEST_CASE("the provider replaces spectral computation") {
        CertificationConfig cfg;
        cfg.ell = Rational(1, 25);
        cfg.bins_init = 100;
        int calls = 0;
        cfg.provider = [&](std::int64_t n, double r) {
            ++calls;
            return ProvidedSpectrum{eigen_analysis(build_closed(tenfold_map(), UlamPartition(n)), r), "stub"};
        };
        const CertificationReport rep = run_certification(tenfold_map(), cfg);
        CHECK(rep.certified());
        CHECK(calls >= 1);
        CHECK(rep.iterations.front().h_source == "stub");
    }
}
