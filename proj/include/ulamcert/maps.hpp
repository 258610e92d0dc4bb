#pragma once

#include "ulamcert/rational.hpp"

#include <cstddef>
#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace ulamcert {

/// Closed interval [lo, hi]; empty when lo > hi.
struct Interval {
    double lo = 1.0;
    double hi = 0.0;

    static Interval none() { return {}; }
    bool is_empty() const { return lo > hi; }
    double length() const { return is_empty() ? 0.0 : hi - lo; }
    bool contains(double x) const { return !is_empty() && lo <= x && x <= hi; }
};

Interval intersect(const Interval& a, const Interval& b);

enum class BranchKind { kLinear, kMoebius, kTabulated, kCallable };
enum class Orientation { kIncreasing, kDecreasing };

std::string to_string(BranchKind kind);

/// x -> slope * x + intercept
struct LinearParams {
    Rational slope;
    Rational intercept;
};

/// x -> (p x + q) / (r x + s)
struct MoebiusParams {
    Rational p, q, r, s;
};

/// Monotone piecewise-linear interpolant through (x[k], y[k]).
struct TabulatedParams {
    std::vector<double> x;
    std::vector<double> y;
};

/// Arbitrary monotone C^1 branch. The inverse is found by bisection.
struct CallableParams {
    std::function<double(double)> forward;
    std::function<double(double)> derivative;
    std::string description;
};

/// One monotone piece of an interval map, living on [lo, hi).
class Branch {
public:
    static Branch linear(Rational lo, Rational hi, Rational slope, Rational intercept);
    static Branch moebius(Rational lo, Rational hi, Rational p, Rational q, Rational r, Rational s);
    static Branch tabulated(Rational lo, Rational hi, std::vector<double> x, std::vector<double> y);
    static Branch callable(Rational lo, Rational hi, std::function<double(double)> forward,
                           std::function<double(double)> derivative, std::string description);

    BranchKind kind() const;
    Orientation orientation() const { return orientation_; }

    const Rational& lo() const { return lo_; }
    const Rational& hi() const { return hi_; }
    Interval domain() const { return {lo_d_, hi_d_}; }
    /// Closure of the image of the domain.
    Interval range() const { return range_; }

    double apply(double x) const;
    double derivative(double x) const;
    /// Inverse on the range; arguments outside the range are clamped.
    double inverse(double y) const;

    /// {x in domain : T(x) in J}; monotonicity makes this a single interval.
    Interval preimage(const Interval& j) const;

    const LinearParams* linear_params() const { return std::get_if<LinearParams>(&params_); }
    const MoebiusParams* moebius_params() const { return std::get_if<MoebiusParams>(&params_); }
    const TabulatedParams* tabulated_params() const { return std::get_if<TabulatedParams>(&params_); }

    /// Canonical text used for fingerprinting.
    std::string describe() const;

private:
    using Params = std::variant<LinearParams, MoebiusParams, TabulatedParams, CallableParams>;
    Branch(Rational lo, Rational hi, Params params);
    void finish_construction();
    double bisect_inverse(double y) const;

    Rational lo_, hi_;
    double lo_d_ = 0.0, hi_d_ = 0.0;
    Params params_;
    Orientation orientation_ = Orientation::kIncreasing;
    Interval range_;
    // Cached doubles for the closed-form kinds.
    double a_ = 0.0, b_ = 0.0, c_ = 0.0, d_ = 0.0;
};

struct ValidationOptions {
    bool require_expansion = true;
    int expansion_samples = 1000;
    int roundtrip_samples = 32;
    double tolerance = 1e-12;
};

/// Piecewise monotone map of [0,1) with its Lasota-Yorke data
/// V(Pf) <= alpha0 V(f) + B0 ||f||_1. The constants are trusted inputs.
/// Immutable after construction.
class PiecewiseMap {
public:
    PiecewiseMap(std::vector<Branch> branches, Rational alpha0, Rational B0, std::string label,
                 ValidationOptions options = {});

    double evaluate(double x) const;
    std::size_t branch_index(double x) const;
    Interval branch_preimage(std::size_t branch, const Interval& j) const;

    const std::vector<Branch>& branches() const { return branches_; }
    const Branch& branch(std::size_t i) const;
    std::size_t size() const { return branches_.size(); }

    const Rational& alpha0() const { return alpha0_; }
    const Rational& B0() const { return B0_; }
    double alpha0_value() const { return to_double(alpha0_); }
    double B0_value() const { return to_double(B0_); }
    const std::string& label() const { return label_; }
    const std::string& fingerprint() const { return fingerprint_; }

    /// Smallest sampled |T'| over all branches.
    double min_expansion(int samples_per_branch = 1000) const;
    bool all_linear() const;
    /// Every branch linear and onto [0,1]; Lebesgue measure is then invariant.
    bool is_linear_full_branch() const;

    /// Hole certification needs alpha0 < 1/3; throws a mode error otherwise.
    void require_hole_uniform() const;

private:
    void validate(const ValidationOptions& options) const;

    std::vector<Branch> branches_;
    std::vector<double> starts_;
    Rational alpha0_, B0_;
    std::string label_;
    std::string fingerprint_;
};

/// alpha0 = 1/beta and B0 = 0 for piecewise-linear maps whose branches are all
/// onto [0,1]. Any other map must declare its constants explicitly.
struct LyInputs {
    Rational alpha0;
    Rational B0;
};
LyInputs markov_linear_constants(const std::vector<Branch>& branches);

/// 64-bit FNV-1a as 16 hex digits; stable across runs and platforms.
std::string fingerprint_of(const std::string& text);

}  // namespace ulamcert
