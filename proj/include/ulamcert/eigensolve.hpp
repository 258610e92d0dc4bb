#pragma once

#include "ulamcert/ulam.hpp"

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace ulamcert {

/// Eigenvalues of a sparse matrix with modulus above a threshold.
struct EigenResult {
    std::vector<std::complex<double>> values;  // sorted by decreasing modulus
    std::vector<double> residuals;             // relative 2-norm residual of each pair
    /// Largest modulus after removing the eigenvalue closest to 1.
    double subdominant_modulus = 0.0;
    std::string method;
    int iterations = 0;
};

struct EigenOptions {
    std::int64_t dense_limit = 1000;
    int initial_block = 16;
    int max_block = 256;
    int max_iterations = 3000;
    double ritz_tolerance = 1e-11;
    std::uint64_t seed = 12345;
};

/// Dense QR algorithm up to dense_limit, block subspace iteration with
/// Rayleigh-Ritz extraction above it.
EigenResult eigenvalues_above(const SparseMatrix& P, double threshold, const EigenOptions& options = {});

/// Fixed row vector phi = phi P of a row-stochastic matrix via the lazy
/// iteration phi <- (phi + phi P) / 2, scaled to sum(phi) * mesh = 1.
std::vector<double> stationary_density(const SparseMatrix& P, double& residual, double tolerance = 1e-14,
                                       int max_iterations = 1'000'000);

}  // namespace ulamcert
