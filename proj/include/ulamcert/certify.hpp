#pragma once

#include "ulamcert/kl.hpp"
#include "ulamcert/maps.hpp"
#include "ulamcert/spectral.hpp"

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ulamcert {

struct SeparationResult {
    bool pass = true;
    std::optional<std::complex<double>> witness;
    /// Eigenvalues within delta of 1.
    std::vector<std::complex<double>> cluster;
};

/// CL = listed eigenvalues within delta of 1; passes when every other listed
/// eigenvalue of modulus above r lies farther than 2 delta from 1.
SeparationResult separation_check(const std::vector<std::complex<double>>& eigenvalues, double r, double delta);

/// Bin counts {1, 2, 5} x 10^m up to max_bins, increasing.
std::vector<std::int64_t> candidate_bins(std::int64_t max_bins = 10'000'000);

/// Smallest candidate bin count whose mesh is <= bound and that is finer than
/// current_bins; 0 when none exists.
std::int64_t bins_for_mesh_bound(double bound, std::int64_t current_bins, const std::vector<std::int64_t>& candidates);

/// Next mesh after a failed step-7 comparison.
struct MeshPlan {
    std::int64_t n_bins = 0;
    bool bootstrap_used = false;
    bool bootstrap_attempted = false;
    std::string message;
    std::optional<BootstrapResult> bootstrap;
    /// (2 Gamma)^-1 epsilon0 predicted with the transferred bound.
    std::optional<KLConstants> predicted;
};

/// Tries the closed-only comparison at the coarse mesh; on success the BV
/// resolvent bound is transferred and the mesh is chosen from the predicted
/// (2 Gamma)^-1 epsilon0. Otherwise the mesh is halved.
MeshPlan refine_with_bootstrap(const LYConstants& ly_hole, const LYConstants& ly_closed, double r, double delta,
                               double H_coarse, std::int64_t coarse_bins,
                               const std::vector<std::int64_t>& candidates);

/// Spectral data for the closed Ulam matrix with n bins at level r, plus a
/// short label for where it came from ("computed", "cache").
struct ProvidedSpectrum {
    SpectralData data;
    std::string source;
};
using SpectrumProvider = std::function<ProvidedSpectrum(std::int64_t n_bins, double r)>;

struct CertificationConfig {
    Rational ell;
    /// 1/k; defaults to k = ceil(1/ell) + 1.
    std::optional<Rational> delta_init;
    std::int64_t bins_init = 1000;
    int max_inner = 12;
    int max_outer = 8;
    bool use_bootstrap = true;
    std::int64_t max_bins = 10'000'000;
    SpectralOptions spectral;
    /// Replaces the default build-and-analyse step (used for caching).
    SpectrumProvider provider;
    std::function<void(const std::string&)> progress;
};

struct IterationRecord {
    int outer = 0;
    int inner = 0;
    std::int64_t n_bins = 0;
    Rational mesh;
    Rational delta;
    std::int64_t k = 0;
    /// "computed", "cache" or "transferred".
    std::string h_source;
    double H = 0.0;
    std::optional<ResolventBound> resolvent;
    std::vector<double> q_power_norms;
    KLConstants kl;
    bool step7_pass = false;
    std::vector<std::complex<double>> eigenvalues;
    bool eigenvalues_inherited = false;
    std::optional<SeparationResult> separation;
    std::optional<MeshPlan> plan;
    std::string outcome;
    double seconds = 0.0;
};

enum class CertificationStatus { kCertified, kFailed };

struct CertificationReport {
    CertificationStatus status = CertificationStatus::kFailed;
    std::string reason;
    std::string map_label;
    std::string map_fingerprint;
    Rational ell;
    Rational r;
    LYConstants ly;
    Rational delta_com;
    Rational epsilon_com;
    std::int64_t final_bins = 0;
    Rational hole_bound;
    double escape_guarantee = 0.0;
    double theorem2_coefficient = 0.0;
    double final_H = 0.0;
    double final_scaled_epsilon0 = 0.0;
    std::vector<IterationRecord> iterations;

    bool certified() const { return status == CertificationStatus::kCertified; }
};

CertificationReport run_certification(const PiecewiseMap& map, const CertificationConfig& config);

struct CertificateBounds {
    bool accim_exists = false;
    double one_minus_eH_upper = 0.0;
    double escape_upper = 0.0;
};

/// Consequences of a certificate for a hole of the given Lebesgue measure.
/// The bounds are meaningful only when accim_exists is true.
CertificateBounds certificate_bounds(const CertificationReport& report, const Rational& hole_measure);

}  // namespace ulamcert
