#pragma once

#include "ulamcert/maps.hpp"

#include <Eigen/SparseCore>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ulamcert {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Uniform partition of [0,1) into n bins [i/n, (i+1)/n).
struct UlamPartition {
    std::int64_t n_bins = 0;

    explicit UlamPartition(std::int64_t n);
    Rational mesh() const { return Rational(1, n_bins); }
    double mesh_value() const { return 1.0 / static_cast<double>(n_bins); }
    Interval bin(std::int64_t i) const;
    /// Index k with k/n == x, or -1 when x is not a partition point.
    std::int64_t point_index(const Rational& x) const;
};

/// Open interval (a, b) removed from the phase space.
struct Hole {
    Rational a;
    Rational b;

    Hole(Rational a, Rational b);
    Rational measure() const { return b - a; }
    /// Throws an alignment error unless a and b are partition points.
    std::pair<std::int64_t, std::int64_t> bin_range(const UlamPartition& partition) const;
    std::string describe() const;
};

enum class MatrixMode { kClosed, kOpen };

/// Transition matrix acting on density coefficient row vectors (x -> x P).
struct UlamMatrix {
    UlamPartition partition{1};
    SparseMatrix P;
    MatrixMode mode = MatrixMode::kClosed;
    std::optional<Hole> hole;
    std::string map_fingerprint;

    std::int64_t size() const { return partition.n_bins; }
    std::vector<double> row_sums() const;
};

/// Entry (i, j) is lambda(bin_i cap T^-1 bin_j) / lambda(bin_i). Linear
/// branches are evaluated in exact rational arithmetic and rounded once.
UlamMatrix build_closed(const PiecewiseMap& map, const UlamPartition& partition);

/// build_closed with every row of a bin inside the hole set to zero.
UlamMatrix build_open(const PiecewiseMap& map, const UlamPartition& partition, const Hole& hole);

/// Open matrix derived from an already assembled closed one.
UlamMatrix make_open(const UlamMatrix& closed, const Hole& hole);

void save_matrix(const UlamMatrix& matrix, const std::string& path);

/// Loads a matrix written by save_matrix. When expected_fingerprint is
/// non-empty and differs from the stored one a warning is appended.
UlamMatrix load_matrix(const std::string& path, const std::string& expected_fingerprint = {},
                       std::vector<std::string>* warnings = nullptr);

}  // namespace ulamcert
