#include "ulamcert/escape.hpp"

#include "ulamcert/eigensolve.hpp"
#include "ulamcert/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace ulamcert {

EscapeEstimate estimate_escape(const UlamMatrix& open, const EscapeOptions& options) {
    if (open.mode != MatrixMode::kOpen || !open.hole) {
        throw Error(ErrorCode::kInvalidArgument, "escape estimation needs an open Ulam matrix");
    }
    const Eigen::Index n = open.P.rows();
    const double h = open.partition.mesh_value();
    const SparseMatrix Pt = open.P.transpose();
    EscapeEstimate out;
    out.hole = *open.hole;
    out.n_bins = open.size();

    Eigen::VectorXd x = Eigen::VectorXd::Ones(n) / static_cast<double>(n);
    double mu_prev = std::numeric_limits<double>::quiet_NaN();
    double spread = std::numeric_limits<double>::infinity();
    int it = 0;
    for (; it < options.max_iterations; ++it) {
        const Eigen::VectorXd xp = Pt * x;
        const double mass = xp.sum();
        if (mass == 0.0) {
            out.total_escape = true;
            out.e_H = 0.0;
            out.escape_rate = std::numeric_limits<double>::infinity();
            out.accim_density.assign(static_cast<std::size_t>(n), 0.0);
            out.iterations = it + 1;
            return out;
        }
        // x has unit sum, so the lazy mass ratio is (1 + mass) / 2.
        const double mu = 0.5 * (1.0 + mass);
        Eigen::VectorXd next = 0.5 * (x + xp);
        next /= next.sum();
        spread = std::abs(mu - mu_prev);
        x = std::move(next);
        mu_prev = mu;
        if (spread <= options.tolerance) {
            const double e = 2.0 * mu - 1.0;
            const double residual = (Pt * x - e * x).lpNorm<1>() / x.lpNorm<1>();
            if (residual <= options.residual_tolerance) break;
        }
    }
    if (it >= options.max_iterations) {
        throw Error(ErrorCode::kNonConvergence, "power iteration stalled; last ratio spread " + std::to_string(spread));
    }
    const Eigen::VectorXd xp = Pt * x;
    out.e_H = xp.sum();  // x has unit sum
    out.iterations = it + 1;
    out.solver_residual = (xp - out.e_H * x).lpNorm<1>() / x.lpNorm<1>();
    if (!(out.solver_residual <= options.residual_tolerance)) {
        throw Error(ErrorCode::kResidual, "escape eigenpair residual " + std::to_string(out.solver_residual));
    }
    out.escape_rate = out.e_H > 0.0 ? -std::log(out.e_H) : std::numeric_limits<double>::infinity();
    out.accim_density.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) out.accim_density[static_cast<std::size_t>(i)] = std::max(0.0, x[i]) / h;
    return out;
}

EscapeEstimate estimate_escape(const PiecewiseMap& map, const UlamPartition& partition, const Hole& hole,
                               const EscapeOptions& options) {
    return estimate_escape(build_open(map, partition, hole), options);
}

namespace {

const Branch* exact_branch(const PiecewiseMap& map, const Rational& y) {
    for (const Branch& b : map.branches()) {
        if (b.lo() <= y && y < b.hi()) return &b;
    }
    return nullptr;
}

}  // namespace

OrbitClass classify_orbit(const PiecewiseMap& map, const Rational& y, int max_period) {
    if (!(y >= 0 && y < 1)) throw Error(ErrorCode::kInvalidArgument, "point must lie in [0,1)");
    constexpr double kTol = 1e-9;
    OrbitClass out;
    if (map.all_linear()) {
        out.exact = true;
        Rational z = y;
        Rational slope_product = 1;
        double closest = std::numeric_limits<double>::infinity();
        for (int p = 1; p <= max_period; ++p) {
            const Branch* b = exact_branch(map, z);
            if (!b) {
                out.note = "orbit left [0,1) at step " + std::to_string(p);
                return out;
            }
            const LinearParams& lin = *b->linear_params();
            slope_product *= lin.slope;
            z = lin.slope * z + lin.intercept;
            if (z == y) {
                out.periodic = true;
                out.period = p;
                out.derivative = to_double(slope_product);
                return out;
            }
            closest = std::min(closest, std::abs(to_double(z - y)));
            if (z >= 1 || z < 0) {
                out.note = "orbit left [0,1) at step " + std::to_string(p);
                return out;
            }
        }
        if (closest <= kTol) {
            out.ambiguous = true;
            out.note = "orbit returns within 1e-9 without exact return";
        }
        return out;
    }
    double z = to_double(y);
    const double y0 = z;
    double derivative = 1.0;
    for (int p = 1; p <= max_period; ++p) {
        const std::size_t idx = map.branch_index(z);
        derivative *= map.branch(idx).derivative(z);
        z = map.branch(idx).apply(z);
        if (std::abs(z - y0) <= kTol) {
            out.periodic = true;
            out.period = p;
            out.derivative = derivative;
            out.note = "floating-point return within 1e-9";
            return out;
        }
        if (!(z >= 0.0 && z < 1.0)) {
            if (z >= 1.0 && z - 1.0 <= kTol) {
                out.ambiguous = true;
                out.note = "orbit reached the right endpoint";
            }
            return out;
        }
    }
    return out;
}

Hole aligned_hole_around(const Rational& y, const Rational& width, std::int64_t n_bins) {
    std::int64_t span = 0;
    if (!to_int64(width * n_bins, span) || span <= 0) {
        throw Error(ErrorCode::kAlignment, "hole width " + format_rational(width) + " is not a multiple of 1/" +
                                               std::to_string(n_bins));
    }
    Rational a = floor((y - width / 2) * n_bins) / n_bins;
    if (a < 0) a = 0;
    if (a + width > 1) a = 1 - width;
    if (!(a <= y && y <= a + width)) {
        throw Error(ErrorCode::kInvalidArgument, "cannot place an aligned hole around " + format_rational(y));
    }
    return Hole(a, a + width);
}

AsymptoticRatioExperiment asymptotic_ratio(const PiecewiseMap& map, const Rational& y,
                                           const std::vector<Rational>& widths, std::int64_t bins_per_hole,
                                           const EscapeOptions& options) {
    if (!(y >= 0 && y < 1)) throw Error(ErrorCode::kInvalidArgument, "point must lie in [0,1)");
    if (widths.empty()) throw Error(ErrorCode::kInvalidArgument, "empty width schedule");
    if (bins_per_hole <= 0) throw Error(ErrorCode::kInvalidArgument, "bins_per_hole must be positive");
    for (std::size_t i = 1; i < widths.size(); ++i) {
        if (!(widths[i] < widths[i - 1])) throw Error(ErrorCode::kInvalidArgument, "widths must strictly decrease");
    }
    AsymptoticRatioExperiment ex;
    ex.y = y;
    ex.bins_per_hole = bins_per_hole;
    ex.orbit = classify_orbit(map, y);

    for (const Rational& w : widths) {
        if (!(w > 0 && w <= 1)) throw Error(ErrorCode::kInvalidArgument, "widths must lie in (0,1]");
        std::int64_t n = 0;
        if (!to_int64(Rational(bins_per_hole) / w, n)) {
            throw Error(ErrorCode::kAlignment, "bins_per_hole / width is not an integer for width " +
                                                   format_rational(w));
        }
        HoleRatio hr{w, n, aligned_hole_around(y, w, n)};
        const EscapeEstimate est = estimate_escape(map, UlamPartition(n), hr.hole, options);
        hr.e_H = est.e_H;
        hr.escape_rate = est.escape_rate;
        hr.ratio = (1.0 - est.e_H) / to_double(w);
        if (!ex.holes.empty()) {
            const Hole& outer = ex.holes.back().hole;
            ex.nested = ex.nested && outer.a <= hr.hole.a && hr.hole.b <= outer.b;
        }
        ex.holes.push_back(hr);
    }

    if (ex.holes.size() == 1) {
        ex.extrapolated_limit = ex.holes.front().ratio;
        ex.low_confidence = true;
    } else {
        double sx = 0.0;
        double sy = 0.0;
        double sxx = 0.0;
        double sxy = 0.0;
        const double m = static_cast<double>(ex.holes.size());
        for (const auto& hr : ex.holes) {
            const double x = to_double(hr.width);
            sx += x;
            sy += hr.ratio;
            sxx += x * x;
            sxy += x * hr.ratio;
        }
        const double den = m * sxx - sx * sx;
        ex.slope = (m * sxy - sx * sy) / den;
        ex.extrapolated_limit = (sy - ex.slope * sx) / m;
    }

    if (map.is_linear_full_branch()) {
        ex.density_at_y = 1.0;
        ex.density_analytic = true;
    } else {
        // Advisory only: the Ulam density is an L1 approximation.
        const std::int64_t n = ex.holes.back().n_bins;
        const UlamMatrix closed = build_closed(map, UlamPartition(n));
        double residual = 0.0;
        const auto density = stationary_density(closed.P, residual);
        std::int64_t bin = 0;
        to_int64(floor(y * n), bin);
        ex.density_at_y = density[static_cast<std::size_t>(std::min(bin, n - 1))];
        ex.assumptions.push_back("f* estimated from the Ulam density; advisory only");
    }
    ex.predicted_limit = ex.density_at_y;
    if (ex.orbit.periodic) ex.predicted_limit *= 1.0 - 1.0 / std::abs(ex.orbit.derivative);
    ex.assumptions.push_back("continuity of T at y assumed, not checked");
    ex.assumptions.push_back("continuity of f* at y assumed, not checked");
    return ex;
}

}  // namespace ulamcert
