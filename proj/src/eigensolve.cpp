#include "ulamcert/eigensolve.hpp"

#include "ulamcert/error.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace ulamcert {

namespace {

using cd = std::complex<double>;

double subdominant_of(std::vector<cd> values) {
    if (values.size() <= 1) return 0.0;
    auto closest = std::min_element(values.begin(), values.end(),
                                    [](const cd& a, const cd& b) { return std::abs(a - 1.0) < std::abs(b - 1.0); });
    values.erase(closest);
    double best = 0.0;
    for (const auto& v : values) best = std::max(best, std::abs(v));
    return best;
}

void sort_by_modulus(std::vector<cd>& values, std::vector<double>& residuals) {
    std::vector<std::size_t> order(values.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double ma = std::abs(values[a]);
        const double mb = std::abs(values[b]);
        if (ma != mb) return ma > mb;
        return values[a].imag() > values[b].imag();
    });
    std::vector<cd> v2;
    std::vector<double> r2;
    for (std::size_t k : order) {
        v2.push_back(values[k]);
        r2.push_back(residuals[k]);
    }
    values = std::move(v2);
    residuals = std::move(r2);
}

EigenResult dense_eigenvalues(const SparseMatrix& P, double threshold) {
    const Eigen::MatrixXd D(P);
    Eigen::EigenSolver<Eigen::MatrixXd> solver(D, true);
    if (solver.info() != Eigen::Success) throw Error(ErrorCode::kNonConvergence, "dense eigensolver failed");
    const Eigen::VectorXcd vals = solver.eigenvalues();
    const Eigen::MatrixXcd vecs = solver.eigenvectors();
    const Eigen::MatrixXcd Dc = D.cast<cd>();
    EigenResult out;
    std::vector<cd> all(vals.data(), vals.data() + vals.size());
    for (Eigen::Index k = 0; k < vals.size(); ++k) {
        if (std::abs(vals[k]) <= threshold) continue;
        const Eigen::VectorXcd v = vecs.col(k);
        const double res = (Dc * v - vals[k] * v).norm() / v.norm();
        out.values.push_back(vals[k]);
        out.residuals.push_back(res);
    }
    sort_by_modulus(out.values, out.residuals);
    out.subdominant_modulus = subdominant_of(all);
    out.method = "dense";
    return out;
}

Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& X) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
    return qr.householderQ() * Eigen::MatrixXd::Identity(X.rows(), X.cols());
}

// Block subspace iteration on P with periodic Rayleigh-Ritz extraction. The
// block grows while its smallest Ritz value still lies above the threshold,
// since eigenvalues above it could otherwise be missed.
EigenResult subspace_eigenvalues(const SparseMatrix& P, double threshold, const EigenOptions& options) {
    const Eigen::Index n = P.rows();
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    int m = std::min<int>(options.initial_block, static_cast<int>(n));
    int total_iterations = 0;
    for (;;) {
        Eigen::MatrixXd X(n, m);
        for (Eigen::Index j = 0; j < m; ++j) {
            for (Eigen::Index i = 0; i < n; ++i) X(i, j) = dist(rng);
        }
        X = orthonormalize(X);
        double previous_sub = -1.0;
        bool grow = false;
        for (int it = 1; it <= options.max_iterations; ++it) {
            ++total_iterations;
            X = orthonormalize(P * X);
            if (it % 5 != 0) continue;
            const Eigen::MatrixXd W = P * X;
            const Eigen::MatrixXd H = X.transpose() * W;
            Eigen::EigenSolver<Eigen::MatrixXd> solver(H, true);
            if (solver.info() != Eigen::Success) continue;
            const Eigen::VectorXcd theta = solver.eigenvalues();
            const Eigen::MatrixXcd Y = solver.eigenvectors();
            const Eigen::MatrixXcd XY = X.cast<cd>() * Y;
            const Eigen::MatrixXcd WY = W.cast<cd>() * Y;
            std::vector<cd> values(theta.data(), theta.data() + theta.size());
            std::vector<double> residuals(values.size());
            for (Eigen::Index k = 0; k < theta.size(); ++k) {
                residuals[k] = (WY.col(k) - theta[k] * XY.col(k)).norm() / XY.col(k).norm();
            }
            sort_by_modulus(values, residuals);
            const double smallest = std::abs(values.back());
            if (smallest > threshold) {
                if (m >= options.max_block || m >= n) {
                    throw Error(ErrorCode::kNonConvergence,
                                "more than " + std::to_string(m) + " eigenvalues have modulus above " +
                                    std::to_string(threshold));
                }
                grow = true;
                break;
            }
            bool converged = true;
            EigenResult out;
            for (std::size_t k = 0; k < values.size(); ++k) {
                if (std::abs(values[k]) <= threshold) break;
                converged = converged && residuals[k] <= options.ritz_tolerance;
                out.values.push_back(values[k]);
                out.residuals.push_back(residuals[k]);
            }
            const double sub = subdominant_of(values);
            const bool stable = std::abs(sub - previous_sub) <= 1e-10 * std::max(1.0, sub);
            previous_sub = sub;
            if (converged && (stable || it + 5 > options.max_iterations)) {
                out.subdominant_modulus = sub;
                out.method = "subspace(" + std::to_string(m) + ")";
                out.iterations = total_iterations;
                return out;
            }
        }
        if (!grow) {
            throw Error(ErrorCode::kNonConvergence, "subspace iteration did not converge in " +
                                                        std::to_string(options.max_iterations) + " steps");
        }
        m = std::min<int>(std::min<int>(2 * m, options.max_block), static_cast<int>(n));
    }
}

}  // namespace

EigenResult eigenvalues_above(const SparseMatrix& P, double threshold, const EigenOptions& options) {
    if (P.rows() != P.cols()) throw Error(ErrorCode::kInvalidArgument, "matrix must be square");
    if (P.rows() <= options.dense_limit) return dense_eigenvalues(P, threshold);
    return subspace_eigenvalues(P, threshold, options);
}

std::vector<double> stationary_density(const SparseMatrix& P, double& residual, double tolerance,
                                       int max_iterations) {
    const Eigen::Index n = P.rows();
    Eigen::VectorXd phi = Eigen::VectorXd::Ones(n);
    const SparseMatrix Pt = P.transpose();
    double previous_change = std::numeric_limits<double>::infinity();
    for (int it = 0; it < max_iterations; ++it) {
        Eigen::VectorXd next = 0.5 * (phi + Pt * phi);
        next *= static_cast<double>(n) / next.sum();
        const double change = (next - phi).lpNorm<1>() / next.lpNorm<1>();
        phi = std::move(next);
        if (change <= tolerance) break;
        // Rounding floor reached: the change has stopped shrinking.
        if (change < 1e-12 && change >= previous_change) break;
        previous_change = change;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (phi[i] < 0.0) {
            if (phi[i] < -1e-12) throw Error(ErrorCode::kNumericConsistency, "invariant density has a negative entry");
            phi[i] = 0.0;
        }
    }
    phi *= static_cast<double>(n) / phi.sum();
    residual = (Pt * phi - phi).lpNorm<1>() / phi.lpNorm<1>();
    return {phi.data(), phi.data() + n};
}

}  // namespace ulamcert
