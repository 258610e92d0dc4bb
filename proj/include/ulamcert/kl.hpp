#pragma once

#include "ulamcert/rational.hpp"

#include <string>

namespace ulamcert {

/// kHoleUniform: constants valid for the closed operator and every open
/// operator at once (alpha = 3 alpha0). kClosedOnly: constants of the closed
/// operator alone (alpha = alpha0, B = B_hat).
enum class LyMode { kHoleUniform, kClosedOnly };

std::string to_string(LyMode mode);

/// Constants of the common inequality ||P^n f||_BV <= A alpha^n ||f||_BV + B ||f||_1.
struct LYConstants {
    LyMode mode = LyMode::kHoleUniform;
    Rational alpha0_exact;
    Rational B0_exact;
    double alpha0 = 0.0;
    double B0 = 0.0;
    double alpha = 0.0;
    /// B of the active mode (B_hat in closed-only mode).
    double B = 0.0;
    /// The same B evaluated through the second algebraic form.
    double B_cross_check = 0.0;
    double B_hat = 0.0;
    double A = 1.0;
    /// A (A + B + 2) with the active B.
    double D = 0.0;
    double Gamma = 0.0;
    /// max(1 + alpha0, B0), exact.
    Rational Gamma_exact;
};

LYConstants ly_constants(const Rational& alpha0, const Rational& B0, LyMode mode);

struct KLConstants {
    double r = 0.0;
    double delta = 0.0;
    double H = 0.0;
    int n1 = 0;
    double C = 0.0;
    int n2 = 0;
    /// Unclamped ceiling; n2 is max(0, n2_raw).
    int n2_raw = 0;
    double gamma = 0.0;
    double epsilon1 = 0.0;
    double epsilon0 = 0.0;
    /// (2 Gamma)^-1 epsilon0, the quantity compared with the mesh.
    double scaled_epsilon0 = 0.0;
    double a = 0.0;
    double b = 0.0;
    /// BV resolvent bound valid for every operator within epsilon1.
    double transfer_bound = 0.0;
};

KLConstants kl_constants(const LYConstants& ly, double r, double delta, double H);

/// Closed-only comparison at a coarse mesh, then transfer of the BV
/// resolvent bound to every finer partition.
struct BootstrapResult {
    KLConstants closed;
    /// (2 Gamma)^-1 epsilon0 with closed-only constants.
    double check_value = 0.0;
    double mesh_coarse = 0.0;
    double transferred_bound = 0.0;
};

/// Throws a precondition error unless mesh_coarse < check_value.
BootstrapResult bootstrap_resolvent_bound(const LYConstants& ly_closed, double r, double delta, double H_coarse,
                                          double mesh_coarse);

}  // namespace ulamcert
