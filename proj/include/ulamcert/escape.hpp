#pragma once

#include "ulamcert/maps.hpp"
#include "ulamcert/ulam.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ulamcert {

struct EscapeOptions {
    double tolerance = 1e-12;
    int max_iterations = 1'000'000;
    double residual_tolerance = 1e-10;
};

struct EscapeEstimate {
    Hole hole{0, 1};
    std::int64_t n_bins = 0;
    double e_H = 0.0;
    /// -ln(e_H); infinite when everything escapes.
    double escape_rate = 0.0;
    /// Nonnegative coefficients with sum(x) * mesh = 1.
    std::vector<double> accim_density;
    double solver_residual = 0.0;
    int iterations = 0;
    bool total_escape = false;
};

/// Dominant eigenpair of the open Ulam matrix by power iteration on the lazy
/// operator x -> (x + x P_H) / 2, which removes any peripheral rotation.
EscapeEstimate estimate_escape(const UlamMatrix& open, const EscapeOptions& options = {});
EscapeEstimate estimate_escape(const PiecewiseMap& map, const UlamPartition& partition, const Hole& hole,
                               const EscapeOptions& options = {});

struct OrbitClass {
    bool periodic = false;
    int period = 0;
    /// (T^p)'(y) for periodic points.
    double derivative = 0.0;
    bool exact = false;
    bool ambiguous = false;
    std::string note;
};

/// Periodicity of y up to max_period. Exact rational iteration when every
/// branch is linear, floating point with tolerance 1e-9 otherwise.
OrbitClass classify_orbit(const PiecewiseMap& map, const Rational& y, int max_period = 32);

struct HoleRatio {
    Rational width;
    std::int64_t n_bins = 0;
    Hole hole{0, 1};
    double e_H = 0.0;
    double escape_rate = 0.0;
    double ratio = 0.0;
};

struct AsymptoticRatioExperiment {
    Rational y;
    std::int64_t bins_per_hole = 0;
    std::vector<HoleRatio> holes;
    bool nested = true;
    /// Intercept of the least-squares line ratio = L + s * lambda(H).
    double extrapolated_limit = 0.0;
    double slope = 0.0;
    bool low_confidence = false;
    OrbitClass orbit;
    /// f*(y) from the analytic density (onto linear maps) or the Ulam density.
    double density_at_y = 0.0;
    bool density_analytic = false;
    /// f*(y), times (1 - 1/|(T^p)'(y)|) when y is p-periodic.
    double predicted_limit = 0.0;
    std::vector<std::string> assumptions;
};

/// Ratios (1 - e_H) / lambda(H) for nested aligned holes around y. Width w
/// uses a partition of bins_per_hole / w bins, which must be an integer.
AsymptoticRatioExperiment asymptotic_ratio(const PiecewiseMap& map, const Rational& y,
                                           const std::vector<Rational>& widths, std::int64_t bins_per_hole,
                                           const EscapeOptions& options = {});

/// Aligned hole of the given width containing y on an n-bin partition.
Hole aligned_hole_around(const Rational& y, const Rational& width, std::int64_t n_bins);

}  // namespace ulamcert
