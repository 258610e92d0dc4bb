#include "test_support.hpp"

#include "ulamcert/error.hpp"
#include "ulamcert/ulam.hpp"

#include <Eigen/Dense>

#include "doctest.h"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

using namespace ulamcert;
using namespace testsupport;

namespace {

Eigen::MatrixXd dense(const UlamMatrix& m) { return Eigen::MatrixXd(m.P); }

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::kInvalidArgument;
}

double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_SUITE("ulam") {
    TEST_CASE("doubling map on four bins") {
        const Eigen::MatrixXd P = dense(build_closed(doubling_map(), UlamPartition(4)));
        Eigen::MatrixXd expect(4, 4);
        expect << .5, .5, 0, 0, 0, 0, .5, .5, .5, .5, 0, 0, 0, 0, .5, .5;
        CHECK(max_abs_diff(P, expect) == 0.0);
    }

    TEST_CASE("identity map gives the identity matrix") {
        const Eigen::MatrixXd P = dense(build_closed(identity_map(), UlamPartition(7)));
        CHECK(max_abs_diff(P, Eigen::MatrixXd::Identity(7, 7)) == 0.0);
    }

    TEST_CASE("ten-branch map on ten bins matches the independent oracle") {
        const Eigen::MatrixXd P = dense(build_closed(ten_branch_map(), UlamPartition(10)));
        CHECK(P(0, 0) == doctest::Approx(10.0 / 91.0).epsilon(1e-14));
        CHECK(P(0, 0) == doctest::Approx(0.10989010989010989).epsilon(1e-14));
        CHECK(P(0, 1) == doctest::Approx(0.10750119445771619).epsilon(1e-12));
        CHECK(P(3, 5) == doctest::Approx(0.1).epsilon(1e-15));
        CHECK(P(3, 0) == doctest::Approx(0.1).epsilon(1e-15));
    }

    TEST_CASE("decreasing branches: tent map on six bins") {
        const Eigen::MatrixXd P = dense(build_closed(tent_map(), UlamPartition(6)));
        Eigen::MatrixXd expect(6, 6);
        expect << .5, .5, 0, 0, 0, 0,  //
            0, 0, .5, .5, 0, 0,        //
            0, 0, 0, 0, .5, .5,        //
            0, 0, 0, 0, .5, .5,        //
            0, 0, .5, .5, 0, 0,        //
            .5, .5, 0, 0, 0, 0;
        CHECK(max_abs_diff(P, expect) <= 1e-15);
    }

    TEST_CASE("open matrix of the tenfold map has dominant eigenvalue 9/10") {
        const UlamMatrix open = build_open(tenfold_map(), UlamPartition(10), Hole(0, Rational(1, 10)));
        CHECK(open.mode == MatrixMode::kOpen);
        const Eigen::MatrixXd P = dense(open);
        CHECK(P.row(0).cwiseAbs().sum() == 0.0);
        for (int i = 1; i < 10; ++i)
            for (int j = 0; j < 10; ++j) CHECK(P(i, j) == doctest::Approx(0.1).epsilon(1e-15));
        Eigen::EigenSolver<Eigen::MatrixXd> es(P);
        double top = 0;
        for (int k = 0; k < 10; ++k) top = std::max(top, std::abs(es.eigenvalues()[k]));
        CHECK(top == doctest::Approx(0.9).epsilon(1e-12));
    }

    TEST_CASE("hole validation and alignment") {
        CHECK(code_of([] { Hole(Rational(1, 2), Rational(1, 2)); }) == ErrorCode::kInvalidArgument);
        CHECK(code_of([] { Hole(Rational(-1, 2), Rational(1, 2)); }) == ErrorCode::kInvalidArgument);
        CHECK(code_of([] {
                  build_open(ten_branch_map(), UlamPartition(5000),
                             Hole(Rational(1, 2), Rational(1, 2) + Rational(2, 9000)));
              }) == ErrorCode::kAlignment);
        const auto range = Hole(Rational(1, 2), Rational(51, 100)).bin_range(UlamPartition(200));
        CHECK(range.first == 100);
        CHECK(range.second == 102);
        CHECK(code_of([] { build_closed(ten_branch_map(), UlamPartition(5)); }) == ErrorCode::kInvalidArgument);
        CHECK(code_of([] { UlamPartition(0); }) == ErrorCode::kInvalidArgument);
    }

    TEST_CASE("save and load round trip is bitwise exact") {
        const std::string dir = temp_dir("ulam-io");
        const std::string path = dir + "/m.txt";
        const UlamMatrix m = build_open(ten_branch_map(), UlamPartition(200), Hole(Rational(1, 2), Rational(51, 100)));
        save_matrix(m, path);
        std::vector<std::string> warnings;
        const UlamMatrix back = load_matrix(path, m.map_fingerprint, &warnings);
        CHECK(warnings.empty());
        CHECK(back.mode == MatrixMode::kOpen);
        REQUIRE(back.hole.has_value());
        CHECK(back.hole->a == Rational(1, 2));
        CHECK(back.hole->b == Rational(51, 100));
        CHECK(back.P.nonZeros() == m.P.nonZeros());
        CHECK(max_abs_diff(dense(back), dense(m)) == 0.0);

        load_matrix(path, "0000000000000000", &warnings);
        CHECK(warnings.size() == 1);

        std::ifstream in(path);
        std::stringstream ss;
        ss << in.rdbuf();
        const std::string text = ss.str();
        std::ofstream(dir + "/cut.txt") << text.substr(0, text.size() / 2);
        CHECK(code_of([&] { load_matrix(dir + "/cut.txt"); }) == ErrorCode::kParse);
        CHECK(code_of([&] { load_matrix(dir + "/missing.txt"); }) == ErrorCode::kIo);
    }

    TEST_CASE("property: rows of random linear maps are stochastic and mass is conserved") {
        std::mt19937_64 rng(424242);
        std::uniform_int_distribution<int> nbins(5, 300);
        for (int trial = 0; trial < 25; ++trial) {
            const PiecewiseMap map = random_linear_map(rng);
            const int n = nbins(rng);
            const UlamMatrix m = build_closed(map, UlamPartition(n));
            for (double s : m.row_sums()) CHECK(std::abs(s - 1.0) <= 1e-12);
            Eigen::VectorXd x = Eigen::VectorXd::Random(n).cwiseAbs();
            x /= x.sum();
            const Eigen::VectorXd y = (x.transpose() * m.P).transpose();
            CHECK(std::abs(y.sum() - 1.0) <= 1e-12);
            CHECK(y.minCoeff() >= 0.0);
        }
    }

    TEST_CASE("property: aggregating the 2n-bin matrix recovers the n-bin matrix") {
        std::mt19937_64 rng(5150);
        std::vector<PiecewiseMap> maps = {doubling_map(), ten_branch_map()};
        for (int k = 0; k < 5; ++k) maps.push_back(random_linear_map(rng));
        for (const PiecewiseMap& map : maps) {
            for (int n : {10, 30, 60}) {
                const Eigen::MatrixXd Pn = dense(build_closed(map, UlamPartition(n)));
                const Eigen::MatrixXd P2 = dense(build_closed(map, UlamPartition(2 * n)));
                Eigen::MatrixXd agg = Eigen::MatrixXd::Zero(n, n);
                for (int a = 0; a < 2 * n; ++a)
                    for (int b = 0; b < 2 * n; ++b) agg(a / 2, b / 2) += 0.5 * P2(a, b);
                CHECK(max_abs_diff(agg, Pn) <= 1e-12);
            }
        }
    }

    TEST_CASE("property: open and closed rows agree outside the hole") {
        std::mt19937_64 rng(11);
        for (int trial = 0; trial < 10; ++trial) {
            const PiecewiseMap map = random_linear_map(rng);
            const int n = 120;
            std::uniform_int_distribution<int> lo_d(0, n - 2);
            const int lo = lo_d(rng);
            std::uniform_int_distribution<int> hi_d(lo + 1, std::min(n, lo + 20));
            const int hi = hi_d(rng);
            const Hole hole(Rational(lo, n), Rational(hi, n));
            const UlamMatrix closed = build_closed(map, UlamPartition(n));
            const Eigen::MatrixXd C = dense(closed);
            const Eigen::MatrixXd O = dense(build_open(map, UlamPartition(n), hole));
            const Eigen::MatrixXd O2 = dense(make_open(closed, hole));
            CHECK(max_abs_diff(O, O2) == 0.0);
            for (int i = 0; i < n; ++i) {
                if (i >= lo && i < hi) {
                    CHECK(O.row(i).cwiseAbs().sum() == 0.0);
                } else {
                    CHECK((O.row(i) - C.row(i)).cwiseAbs().maxCoeff() == 0.0);
                }
            }
        }
    }
}
