#include "ulamcert/kl.hpp"

#include "ulamcert/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace ulamcert {

std::string to_string(LyMode mode) { return mode == LyMode::kHoleUniform ? "hole-uniform" : "closed-only"; }

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

int ceil_to_int(double v) {
    if (!std::isfinite(v) || std::abs(v) > 1e9) throw Error(ErrorCode::kDomain, "exponent out of range: " + fmt(v));
    return static_cast<int>(std::ceil(v));
}

}  // namespace

LYConstants ly_constants(const Rational& alpha0, const Rational& B0, LyMode mode) {
    if (!(alpha0 > 0 && alpha0 < 1)) throw Error(ErrorCode::kDomain, "alpha0 must lie in (0,1)");
    if (B0 < 0) throw Error(ErrorCode::kDomain, "B0 must be nonnegative");
    if (mode == LyMode::kHoleUniform && !(alpha0 * 3 < 1)) {
        throw Error(ErrorCode::kMode, "hole-uniform constants need alpha0 < 1/3, got " + format_rational(alpha0));
    }
    LYConstants ly;
    ly.mode = mode;
    ly.alpha0_exact = alpha0;
    ly.B0_exact = B0;
    ly.alpha0 = to_double(alpha0);
    ly.B0 = to_double(B0);
    ly.Gamma_exact = std::max(Rational(1 + alpha0), B0);
    ly.Gamma = to_double(ly.Gamma_exact);
    ly.B_hat = to_double(1 + B0 / (1 - alpha0));
    if (mode == LyMode::kHoleUniform) {
        const Rational alpha = alpha0 * 3;
        ly.alpha = to_double(alpha);
        ly.B = (1.0 - ly.alpha0 + ly.B0) / (1.0 - ly.alpha);
        ly.B_cross_check = 1.0 + (2.0 * ly.alpha0 + ly.B0) / (1.0 - ly.alpha);
    } else {
        ly.alpha = ly.alpha0;
        ly.B = ly.B_hat;
        ly.B_cross_check = (1.0 - ly.alpha0 + ly.B0) / (1.0 - ly.alpha0);
    }
    if (std::abs(ly.B - ly.B_cross_check) > 1e-14 * std::max(1.0, ly.B)) {
        throw Error(ErrorCode::kNumericConsistency, "the two forms of B disagree: " + fmt(ly.B) + " vs " +
                                                        fmt(ly.B_cross_check));
    }
    ly.D = ly.A * (ly.A + ly.B + 2.0);
    return ly;
}

KLConstants kl_constants(const LYConstants& ly, double r, double delta, double H) {
    if (!(r > ly.alpha && r < 1.0)) {
        throw Error(ErrorCode::kDomain, "need alpha < r < 1 (alpha = " + fmt(ly.alpha) + ", r = " + fmt(r) + ")");
    }
    if (!(delta > 0.0)) throw Error(ErrorCode::kDomain, "delta must be positive");
    if (!(H > 0.0) || !std::isfinite(H)) throw Error(ErrorCode::kDomain, "H must be positive and finite");
    const double A = ly.A;
    const double B = ly.B;
    const double D = ly.D;
    const double log_ratio = std::log(r / ly.alpha);
    const double inv_gap = 1.0 / (1.0 - r);

    KLConstants k;
    k.r = r;
    k.delta = delta;
    k.H = H;
    k.n1 = ceil_to_int(std::log(2.0 * A) / log_ratio);
    k.C = std::pow(r, -k.n1);
    k.n2_raw = ceil_to_int(std::log(8.0 * B * D * k.C * H) / log_ratio);
    k.n2 = std::max(0, k.n2_raw);
    k.gamma = log_ratio / std::log(1.0 / ly.alpha);
    k.epsilon1 = std::pow(r, k.n1 + k.n2) / (8.0 * B * (H * B + inv_gap));
    const double base = std::pow(r, k.n1) / (4.0 * B * (H * (D + B) + 2.0 * A * (A + B) + inv_gap));
    k.epsilon0 = std::min(k.epsilon1, std::pow(base, k.gamma));
    k.scaled_epsilon0 = k.epsilon0 / (2.0 * ly.Gamma);
    const double AB = A + B;
    const double r_n1 = std::pow(r, -k.n1);
    k.a = (8.0 * (2.0 * A * AB + inv_gap) * AB * AB * r_n1 + 1.0) * inv_gap;
    k.b = 2.0 * ((4.0 * AB * AB * (D + B) + B) * inv_gap * r_n1 + B);
    k.transfer_bound = 4.0 * AB * inv_gap * r_n1 + 1.0 / (2.0 * k.epsilon1);
    return k;
}

BootstrapResult bootstrap_resolvent_bound(const LYConstants& ly_closed, double r, double delta, double H_coarse,
                                          double mesh_coarse) {
    if (ly_closed.mode != LyMode::kClosedOnly) {
        throw Error(ErrorCode::kMode, "the resolvent transfer uses closed-only constants");
    }
    BootstrapResult out;
    out.closed = kl_constants(ly_closed, r, delta, H_coarse);
    out.check_value = out.closed.scaled_epsilon0;
    out.mesh_coarse = mesh_coarse;
    if (!(mesh_coarse < out.check_value)) {
        throw Error(ErrorCode::kPrecondition, "closed-only comparison fails: mesh " + fmt(mesh_coarse) +
                                                  " is not below (2 Gamma)^-1 epsilon0 = " + fmt(out.check_value));
    }
    out.transferred_bound = out.closed.transfer_bound;
    return out;
}

}  // namespace ulamcert
