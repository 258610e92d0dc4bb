#include "ulamcert/spectral.hpp"

#include "ulamcert/error.hpp"
#include "ulamcert/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

namespace ulamcert {

std::string to_string(PowerNormConvention convention) {
    return convention == PowerNormConvention::kColumnSum ? "column-sum" : "row-sum";
}

PowerNormConvention parse_convention(const std::string& text) {
    if (text == "column-sum" || text == "column") return PowerNormConvention::kColumnSum;
    if (text == "row-sum" || text == "row") return PowerNormConvention::kRowSum;
    throw Error(ErrorCode::kInvalidArgument, "unknown norm convention '" + text + "'");
}

double SpectralData::leading_norm() const {
    if (convention == PowerNormConvention::kColumnSum) return 1.0;
    return q_power_norms.empty() ? 1.0 : q_power_norms.front();
}

double operator_l1_norm(const SparseMatrix& A) {
    double best = 0.0;
    for (Eigen::Index i = 0; i < A.outerSize(); ++i) {
        double s = 0.0;
        for (SparseMatrix::InnerIterator it(A, i); it; ++it) s += std::abs(it.value());
        best = std::max(best, s);
    }
    return best;
}

double operator_l1_norm(const Eigen::MatrixXd& A) {
    if (A.size() == 0) return 0.0;
    return A.cwiseAbs().rowwise().sum().maxCoeff();
}

std::vector<double> q_power_norms(const SparseMatrix& P, const std::vector<double>& density, int count,
                                  PowerNormConvention convention) {
    const Eigen::Index n = P.rows();
    if (static_cast<Eigen::Index>(density.size()) != n) {
        throw Error(ErrorCode::kInvalidArgument, "density length does not match the matrix");
    }
    if (count <= 0) return {};
    const double h = 1.0 / static_cast<double>(n);
    Eigen::VectorXd hf(n);
    for (Eigen::Index i = 0; i < n; ++i) hf[i] = h * density[static_cast<std::size_t>(i)];

    std::vector<double> norms(static_cast<std::size_t>(count), 0.0);
    // n = 0: the projection 1 - Pi itself.
    for (Eigen::Index i = 0; i < n; ++i) {
        const double off = convention == PowerNormConvention::kRowSum ? 1.0 - hf[i]
                                                                      : static_cast<double>(n - 1) * hf[i];
        norms[0] = std::max(norms[0], std::abs(1.0 - hf[i]) + off);
    }
    if (count == 1) return norms;

    // Column convention propagates columns of P^k (Z <- P Z); row convention
    // propagates rows, i.e. columns of (P^T)^k. The rank-one part Pi is
    // subtracted entrywise, so no dense power is ever formed.
    const SparseMatrix M = convention == PowerNormConvention::kColumnSum ? P : SparseMatrix(P.transpose());
    const Eigen::Index block = std::min<Eigen::Index>(n, std::max<Eigen::Index>(16, 4'000'000 / n));
    const std::size_t batches = static_cast<std::size_t>((n + block - 1) / block);
    std::mutex merge_mutex;
    parallel_for(batches, [&](std::size_t b0, std::size_t b1) {
        std::vector<double> local(norms.size(), 0.0);
        for (std::size_t b = b0; b < b1; ++b) {
            const Eigen::Index start = static_cast<Eigen::Index>(b) * block;
            const Eigen::Index width = std::min(block, n - start);
            Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(n, width);
            for (Eigen::Index c = 0; c < width; ++c) Z(start + c, c) = 1.0;
            for (int k = 1; k < count; ++k) {
                Z = M * Z;
                double best = 0.0;
                for (Eigen::Index c = 0; c < width; ++c) {
                    double s = 0.0;
                    if (convention == PowerNormConvention::kColumnSum) {
                        const double sub = hf[start + c];
                        for (Eigen::Index i = 0; i < n; ++i) s += std::abs(Z(i, c) - sub);
                    } else {
                        for (Eigen::Index i = 0; i < n; ++i) s += std::abs(Z(i, c) - hf[i]);
                    }
                    best = std::max(best, s);
                }
                local[static_cast<std::size_t>(k)] = std::max(local[static_cast<std::size_t>(k)], best);
            }
        }
        std::lock_guard<std::mutex> lock(merge_mutex);
        for (std::size_t k = 1; k < norms.size(); ++k) norms[k] = std::max(norms[k], local[k]);
    });
    return norms;
}

namespace {

double radius_bound(const std::vector<double>& norms) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < norms.size(); ++k) {
        best = std::min(best, std::pow(norms[k], 1.0 / static_cast<double>(k)));
    }
    return best;
}

double tail_ratio(const std::vector<double>& norms, int N, double r) {
    return norms[static_cast<std::size_t>(N + 1)] / std::pow(r, N + 1);
}

}  // namespace

SpectralData eigen_analysis(const UlamMatrix& matrix, double r, const SpectralOptions& options) {
    if (matrix.mode != MatrixMode::kClosed) {
        throw Error(ErrorCode::kInvalidArgument, "spectral analysis needs a closed Ulam matrix");
    }
    if (!(r > 0.0 && r < 1.0)) throw Error(ErrorCode::kDomain, "r must lie in (0,1)");
    if (options.truncation_N < 0 || options.max_N < options.truncation_N) {
        throw Error(ErrorCode::kInvalidArgument, "bad truncation settings");
    }
    SpectralData data;
    data.n_bins = matrix.size();
    data.r = r;
    data.convention = options.convention;

    EigenOptions eig_options;
    eig_options.dense_limit = options.dense_limit;
    EigenResult eig = eigenvalues_above(matrix.P, r, eig_options);
    data.eigenvalues_above_r = eig.values;
    data.residuals = eig.residuals;
    data.subdominant_modulus = eig.subdominant_modulus;
    data.method = eig.method;
    data.eigen_iterations = eig.iterations;

    double unit_distance = std::numeric_limits<double>::infinity();
    for (const auto& v : data.eigenvalues_above_r) unit_distance = std::min(unit_distance, std::abs(v - 1.0));
    if (!(unit_distance <= options.unit_tolerance)) {
        throw Error(ErrorCode::kNoUnitEigenvalue, "no eigenvalue within " + std::to_string(options.unit_tolerance) +
                                                      " of 1");
    }
    for (std::size_t k = 0; k < data.residuals.size(); ++k) {
        if (!(data.residuals[k] <= options.residual_tolerance)) {
            std::ostringstream os;
            os << "eigenpair " << data.eigenvalues_above_r[k] << " has residual " << data.residuals[k];
            throw Error(ErrorCode::kResidual, os.str());
        }
    }

    data.invariant_density = stationary_density(matrix.P, data.density_residual);
    if (!(data.density_residual <= options.residual_tolerance)) {
        throw Error(ErrorCode::kResidual,
                    "invariant density residual " + std::to_string(data.density_residual) + " is too large");
    }
    const double h = matrix.partition.mesh_value();
    double mass = 0.0;
    for (double f : data.invariant_density) mass += std::abs(f) * h;
    data.projection_norm = mass;

    int N = options.truncation_N;
    data.q_power_norms = q_power_norms(matrix.P, data.invariant_density, N + 2, options.convention);
    while (tail_ratio(data.q_power_norms, N, r) >= 1.0 && N < options.max_N) {
        N = std::min(options.max_N, N + std::max(1, N / 2));
        data.q_power_norms = q_power_norms(matrix.P, data.invariant_density, N + 2, options.convention);
    }
    data.truncation_N = N;
    data.q_radius_bound = radius_bound(data.q_power_norms);
    return data;
}

double neumann_bound(const SpectralData& data, double r, int* truncation_used, double* tail) {
    if (!(r > 0.0)) throw Error(ErrorCode::kDomain, "r must be positive");
    if (data.q_power_norms.size() < 2) throw Error(ErrorCode::kInvalidArgument, "no Q-power norms available");
    const int available = static_cast<int>(data.q_power_norms.size()) - 2;
    int N = std::min(data.truncation_N, available);
    double q = tail_ratio(data.q_power_norms, N, r);
    while (q >= 1.0 && N < available) {
        ++N;
        q = tail_ratio(data.q_power_norms, N, r);
    }
    if (q >= 1.0) {
        throw Error(ErrorCode::kDivergence, "Neumann tail ratio " + std::to_string(q) + " >= 1 at N = " +
                                                std::to_string(N));
    }
    double sum = data.leading_norm();
    for (int k = 1; k <= N; ++k) sum += data.q_power_norms[static_cast<std::size_t>(k)] / std::pow(r, k);
    if (truncation_used) *truncation_used = N;
    if (tail) *tail = q;
    return sum / r / (1.0 - q);
}

ResolventBound h_star(const SpectralData& data, double r, double delta, double alpha0, double B0) {
    if (!(delta > 0.0)) throw Error(ErrorCode::kDomain, "delta must be positive");
    if (!(r > alpha0 && r < 1.0)) throw Error(ErrorCode::kDomain, "need alpha0 < r < 1");
    if (r < data.r - 1e-15) {
        throw Error(ErrorCode::kPrecondition, "spectral data computed for r = " + std::to_string(data.r) +
                                                  " cannot certify the smaller r = " + std::to_string(r));
    }
    int above = 0;
    bool unit_found = false;
    for (const auto& v : data.eigenvalues_above_r) {
        if (std::abs(v) <= r) continue;
        ++above;
        unit_found = unit_found || std::abs(v - 1.0) <= 1e-8;
    }
    if (above != 1 || !unit_found) {
        throw Error(ErrorCode::kSpectralStructure, std::to_string(above) +
                                                       " eigenvalues above r; the bound needs exactly one, simple, at 1");
    }
    const double limit = r - delta;
    if (!(data.subdominant_modulus <= limit || data.q_radius_bound <= limit)) {
        throw Error(ErrorCode::kSpectralStructure,
                    "an eigenvalue other than 1 may exceed r - delta = " + std::to_string(limit));
    }
    ResolventBound out;
    out.r = r;
    out.delta = delta;
    out.neumann_bound = neumann_bound(data, r, &out.truncation_N, &out.tail_ratio);
    out.resolvent_l1_bound = data.projection_norm / delta + out.neumann_bound;
    out.h_star = (B0 / (r - alpha0) + 1.0) * out.resolvent_l1_bound + 1.0 / (r - alpha0) + 2.0 / r;
    return out;
}

}  // namespace ulamcert
