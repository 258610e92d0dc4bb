#include "test_support.hpp"

#include "ulamcert/error.hpp"
#include "ulamcert/escape.hpp"

#include <Eigen/Dense>

#include "doctest.h"

#include <cmath>
#include <random>

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

double dense_spectral_radius(const UlamMatrix& m) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(m.P), false);
    double top = 0.0;
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) top = std::max(top, std::abs(es.eigenvalues()[k]));
    return top;
}

}  // namespace

TEST_SUITE("escape") {
    TEST_CASE("tenfold map with the first bin removed") {
        const EscapeEstimate e = estimate_escape(tenfold_map(), UlamPartition(10), Hole(0, Rational(1, 10)));
        CHECK(std::abs(e.e_H - 0.9) <= 1e-12);
        CHECK(e.escape_rate == doctest::Approx(-std::log(0.9)).epsilon(1e-11));
        CHECK_FALSE(e.total_escape);
        for (double f : e.accim_density) CHECK(f == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(e.solver_residual <= 1e-10);
    }

    TEST_CASE("removing everything is total escape") {
        const EscapeEstimate e = estimate_escape(tenfold_map(), UlamPartition(10), Hole(0, 1));
        CHECK(e.total_escape);
        CHECK(e.e_H == 0.0);
        CHECK(std::isinf(e.escape_rate));
    }

    TEST_CASE("escape values match the independent oracle") {
        CHECK(estimate_escape(tenfold_map(), UlamPartition(100), Hole(0, Rational(1, 100))).e_H ==
              doctest::Approx(0.9908326913195991).epsilon(1e-10));
        CHECK(estimate_escape(tenfold_map(), UlamPartition(100), Hole(Rational(41, 100), Rational(42, 100))).e_H ==
              doctest::Approx(0.9898979485566368).epsilon(1e-10));
        CHECK(estimate_escape(ten_branch_map(), UlamPartition(200), Hole(Rational(1, 2), Rational(51, 100))).e_H ==
              doctest::Approx(0.9899025171183926).epsilon(1e-10));
    }

    TEST_CASE("closed matrices are rejected") {
        const UlamMatrix closed = build_closed(tenfold_map(), UlamPartition(10));
        CHECK(code_of([&] { estimate_escape(closed); }) == ErrorCode::kInvalidArgument);
    }

    TEST_CASE("property: power iteration agrees with a dense eigensolve") {
        std::mt19937_64 rng(606);
        for (int trial = 0; trial < 12; ++trial) {
            const PiecewiseMap map = trial % 3 == 0 ? ten_branch_map() : random_linear_map(rng);
            const int n = 120;
            std::uniform_int_distribution<int> lo_d(0, n - 1);
            const int lo = lo_d(rng);
            std::uniform_int_distribution<int> hi_d(lo + 1, std::min(n, lo + 6));
            const UlamMatrix open = build_open(map, UlamPartition(n), Hole(Rational(lo, n), Rational(hi_d(rng), n)));
            const EscapeEstimate e = estimate_escape(open);
            const double rho = dense_spectral_radius(open);
            CAPTURE(trial);
            CHECK(e.e_H <= 1.0 + 1e-12);
            CHECK(std::abs(e.e_H - rho) <= 1e-8);
            double mass = 0.0;
            for (double f : e.accim_density) {
                CHECK(f >= 0.0);
                mass += f / n;
            }
            CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
        }
    }

    TEST_CASE("property: enlarging the hole never increases e_H") {
        std::mt19937_64 rng(77);
        for (int trial = 0; trial < 8; ++trial) {
            const PiecewiseMap map = trial % 2 ? tenfold_map() : random_linear_map(rng);
            const int n = 200;
            std::uniform_int_distribution<int> c_d(10, n - 11);
            const int c = c_d(rng);
            double prev = 1.0 + 1e-12;
            for (int half = 1; half <= 10; half += 3) {
                const double e =
                    estimate_escape(map, UlamPartition(n), Hole(Rational(c - half, n), Rational(c + half, n))).e_H;
                CHECK(e <= prev + 1e-12);
                prev = e;
            }
        }
    }

    TEST_CASE("orbit classification") {
        const PiecewiseMap t = tenfold_map();
        const OrbitClass zero = classify_orbit(t, 0);
        CHECK(zero.periodic);
        CHECK(zero.exact);
        CHECK(zero.period == 1);
        CHECK(zero.derivative == 10.0);
        const OrbitClass third = classify_orbit(t, Rational(1, 3));
        CHECK(third.periodic);
        CHECK(third.period == 1);
        const OrbitClass eleventh = classify_orbit(t, Rational(1, 11));
        CHECK(eleventh.periodic);
        CHECK(eleventh.period == 2);
        CHECK(eleventh.derivative == 100.0);
        CHECK_FALSE(classify_orbit(t, parse_rational("0.41421356237309504880")).periodic);
        CHECK_FALSE(classify_orbit(t, Rational(1, 4)).periodic);  // preperiodic, lands on 0
        const OrbitClass mob = classify_orbit(ten_branch_map(), 0);
        CHECK(mob.periodic);
        CHECK_FALSE(mob.exact);
        CHECK(mob.derivative == doctest::Approx(9.0));
        CHECK(code_of([&] { classify_orbit(t, 1); }) == ErrorCode::kInvalidArgument);
    }

    TEST_CASE("aligned holes around a point") {
        const Hole h = aligned_hole_around(parse_rational("0.41421356237309504880"), Rational(1, 100), 1000);
        CHECK(h.measure() == Rational(1, 100));
        CHECK(h.a <= parse_rational("0.41421356237309504880"));
        CHECK(h.b >= parse_rational("0.41421356237309504880"));
        h.bin_range(UlamPartition(1000));
        const Hole edge = aligned_hole_around(0, Rational(1, 100), 1000);
        CHECK(edge.a == 0);
        CHECK(code_of([] { aligned_hole_around(0, Rational(1, 3), 1000); }) == ErrorCode::kAlignment);
    }

    TEST_CASE("asymptotic ratio bookkeeping") {
        const AsymptoticRatioExperiment one =
            asymptotic_ratio(tenfold_map(), 0, {Rational(1, 10)}, 10);
        CHECK(one.low_confidence);
        CHECK(one.holes.size() == 1);
        CHECK(one.extrapolated_limit == one.holes[0].ratio);
        CHECK(one.density_analytic);
        CHECK(one.predicted_limit == doctest::Approx(0.9));

        const AsymptoticRatioExperiment two =
            asymptotic_ratio(tenfold_map(), 0, {Rational(1, 10), Rational(1, 100)}, 10);
        CHECK_FALSE(two.low_confidence);
        CHECK(two.nested);
        CHECK(two.holes[1].n_bins == 1000);

        CHECK(code_of([] { asymptotic_ratio(tenfold_map(), 0, {Rational(1, 100), Rational(1, 10)}, 10); }) ==
              ErrorCode::kInvalidArgument);
        CHECK(code_of([] { asymptotic_ratio(tenfold_map(), 0, {Rational(3, 100)}, 10); }) == ErrorCode::kAlignment);
        CHECK(code_of([] { asymptotic_ratio(tenfold_map(), 0, {}, 10); }) == ErrorCode::kInvalidArgument);
    }

    TEST_CASE("a periodic hole centre leaks less than a generic one") {
        const std::vector<Rational> widths = {Rational(1, 100), Rational(1, 1000)};
        const auto fixed = asymptotic_ratio(tenfold_map(), 0, widths, 10);
        const auto generic = asymptotic_ratio(tenfold_map(), parse_rational("0.41421356237309504880"), widths, 10);
        for (std::size_t k = 0; k < widths.size(); ++k) CHECK(fixed.holes[k].e_H > generic.holes[k].e_H);
        CHECK_FALSE(generic.orbit.periodic);
        CHECK(generic.predicted_limit == 1.0);
    }
}
