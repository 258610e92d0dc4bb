#pragma once

#include "ulamcert/eigensolve.hpp"
#include "ulamcert/ulam.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace ulamcert {

/// How ||Q^n||_1 is evaluated.
///  kColumnSum: maximum absolute column sum of P^n - Pi, with the n = 0 term
///              of the Neumann series taken as the identity (norm 1). This is
///              the convention that reproduces the reference tables.
///  kRowSum:    maximum absolute row sum (the L1 norm on density coefficients
///              acting by x -> x P), with the n = 0 term ||1 - Pi||.
enum class PowerNormConvention { kColumnSum, kRowSum };

std::string to_string(PowerNormConvention convention);
PowerNormConvention parse_convention(const std::string& text);

struct SpectralOptions {
    std::int64_t dense_limit = 1000;
    int truncation_N = 5;
    int max_N = 64;
    PowerNormConvention convention = PowerNormConvention::kColumnSum;
    double unit_tolerance = 1e-8;
    double residual_tolerance = 1e-8;
};

struct SpectralData {
    std::int64_t n_bins = 0;
    /// r the data was computed for; valid for any r' >= r.
    double r = 0.0;
    std::vector<std::complex<double>> eigenvalues_above_r;
    std::vector<double> residuals;
    double subdominant_modulus = 0.0;
    std::vector<double> invariant_density;
    double density_residual = 0.0;
    double projection_norm = 0.0;
    /// ||Q^n||_1 for n = 0 .. truncation_N + 1 (at least); entry 0 is ||1 - Pi||.
    std::vector<double> q_power_norms;
    int truncation_N = 5;
    PowerNormConvention convention = PowerNormConvention::kColumnSum;
    /// min over k >= 1 of ||Q^k||^(1/k); bounds every non-unit eigenvalue.
    double q_radius_bound = 0.0;
    std::string method;
    int eigen_iterations = 0;

    /// n = 0 coefficient of the Neumann series under the chosen convention.
    double leading_norm() const;
};

struct ResolventBound {
    double r = 0.0;
    double delta = 0.0;
    double neumann_bound = 0.0;
    double resolvent_l1_bound = 0.0;
    double h_star = 0.0;
    int truncation_N = 0;
    double tail_ratio = 0.0;
};

/// Spectral data of a closed Ulam matrix at level r.
SpectralData eigen_analysis(const UlamMatrix& matrix, double r, const SpectralOptions& options = {});

/// ||Q^n||_1 for n = 0 .. count - 1 with Q = P (1 - Pi) and Pi = 1 (h phi)^T.
std::vector<double> q_power_norms(const SparseMatrix& P, const std::vector<double>& density, int count,
                                  PowerNormConvention convention);

/// (1/r) [sum_{n<=N} ||Q^n|| / r^n] / (1 - q), q = ||Q^{N+1}|| / r^{N+1}.
/// N starts at data.truncation_N and grows while q >= 1 and norms are available.
double neumann_bound(const SpectralData& data, double r, int* truncation_used = nullptr, double* tail = nullptr);

/// H* = (B0/(r - alpha0) + 1)(||Pi||/delta + neumann) + 1/(r - alpha0) + 2/r.
ResolventBound h_star(const SpectralData& data, double r, double delta, double alpha0, double B0);

/// Maximum absolute row sum.
double operator_l1_norm(const SparseMatrix& A);
double operator_l1_norm(const Eigen::MatrixXd& A);

}  // namespace ulamcert
