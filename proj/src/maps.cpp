#include "ulamcert/maps.hpp"

#include "ulamcert/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <sstream>

namespace ulamcert {

Interval intersect(const Interval& a, const Interval& b) {
    if (a.is_empty() || b.is_empty()) return Interval::none();
    Interval out{std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
    return out.is_empty() ? Interval::none() : out;
}

std::string to_string(BranchKind kind) {
    switch (kind) {
        case BranchKind::kLinear: return "linear";
        case BranchKind::kMoebius: return "moebius";
        case BranchKind::kTabulated: return "tabulated";
        case BranchKind::kCallable: return "callable";
    }
    return "unknown";
}

std::string fingerprint_of(const std::string& text) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

namespace {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Branch

Branch::Branch(Rational lo, Rational hi, Params params)
    : lo_(std::move(lo)), hi_(std::move(hi)), params_(std::move(params)) {
    if (!(lo_ < hi_)) {
        throw Error(ErrorCode::kInvalidMap, "branch domain [" + format_rational(lo_) + ", " +
                                                format_rational(hi_) + ") is empty");
    }
    lo_d_ = to_double(lo_);
    hi_d_ = to_double(hi_);
}

Branch Branch::linear(Rational lo, Rational hi, Rational slope, Rational intercept) {
    if (slope == 0) throw Error(ErrorCode::kInvalidMap, "linear branch with zero slope");
    Branch b(std::move(lo), std::move(hi), LinearParams{std::move(slope), std::move(intercept)});
    b.finish_construction();
    return b;
}

Branch Branch::moebius(Rational lo, Rational hi, Rational p, Rational q, Rational r, Rational s) {
    if (p * s - q * r == 0) throw Error(ErrorCode::kInvalidMap, "degenerate moebius branch (ps - qr = 0)");
    if ((r * lo + s) * (r * hi + s) <= 0) {
        throw Error(ErrorCode::kInvalidMap, "moebius denominator vanishes on the branch domain");
    }
    Branch b(std::move(lo), std::move(hi), MoebiusParams{std::move(p), std::move(q), std::move(r), std::move(s)});
    b.finish_construction();
    return b;
}

Branch Branch::tabulated(Rational lo, Rational hi, std::vector<double> x, std::vector<double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw Error(ErrorCode::kInvalidMap, "tabulated branch needs matching x/y tables with at least two points");
    }
    for (std::size_t k = 1; k < x.size(); ++k) {
        if (!(x[k] > x[k - 1])) throw Error(ErrorCode::kInvalidMap, "tabulated x values must be strictly increasing");
    }
    const bool increasing = y.back() > y.front();
    for (std::size_t k = 1; k < y.size(); ++k) {
        if (increasing ? !(y[k] > y[k - 1]) : !(y[k] < y[k - 1])) {
            throw Error(ErrorCode::kInvalidMap, "tabulated y values must be strictly monotone");
        }
    }
    Branch b(std::move(lo), std::move(hi), TabulatedParams{std::move(x), std::move(y)});
    const auto& t = *b.tabulated_params();
    if (std::abs(t.x.front() - b.lo_d_) > 1e-15 || std::abs(t.x.back() - b.hi_d_) > 1e-15) {
        throw Error(ErrorCode::kInvalidMap, "tabulated x table must start and end at the branch endpoints");
    }
    b.finish_construction();
    return b;
}

Branch Branch::callable(Rational lo, Rational hi, std::function<double(double)> forward,
                        std::function<double(double)> derivative, std::string description) {
    if (!forward || !derivative) throw Error(ErrorCode::kInvalidMap, "callable branch needs forward and derivative");
    Branch b(std::move(lo), std::move(hi),
             CallableParams{std::move(forward), std::move(derivative), std::move(description)});
    b.finish_construction();
    return b;
}

void Branch::finish_construction() {
    if (const auto* lin = linear_params()) {
        a_ = to_double(lin->slope);
        b_ = to_double(lin->intercept);
        orientation_ = lin->slope > 0 ? Orientation::kIncreasing : Orientation::kDecreasing;
    } else if (const auto* m = moebius_params()) {
        a_ = to_double(m->p);
        b_ = to_double(m->q);
        c_ = to_double(m->r);
        d_ = to_double(m->s);
        orientation_ = (m->p * m->s - m->q * m->r) > 0 ? Orientation::kIncreasing : Orientation::kDecreasing;
    } else if (const auto* t = tabulated_params()) {
        orientation_ = t->y.back() > t->y.front() ? Orientation::kIncreasing : Orientation::kDecreasing;
    } else {
        orientation_ = apply(hi_d_) > apply(lo_d_) ? Orientation::kIncreasing : Orientation::kDecreasing;
    }
    double y0;
    double y1;
    if (const auto* lin = linear_params()) {
        // Exact endpoints keep onto branches exactly onto.
        y0 = to_double(lin->slope * lo_ + lin->intercept);
        y1 = to_double(lin->slope * hi_ + lin->intercept);
    } else if (const auto* m = moebius_params()) {
        y0 = to_double((m->p * lo_ + m->q) / (m->r * lo_ + m->s));
        y1 = to_double((m->p * hi_ + m->q) / (m->r * hi_ + m->s));
    } else {
        y0 = apply(lo_d_);
        y1 = apply(hi_d_);
    }
    range_ = {std::min(y0, y1), std::max(y0, y1)};
}

BranchKind Branch::kind() const {
    switch (params_.index()) {
        case 0: return BranchKind::kLinear;
        case 1: return BranchKind::kMoebius;
        case 2: return BranchKind::kTabulated;
        default: return BranchKind::kCallable;
    }
}

double Branch::apply(double x) const {
    switch (params_.index()) {
        case 0: return a_ * x + b_;
        case 1: return (a_ * x + b_) / (c_ * x + d_);
        case 2: {
            const auto& t = std::get<TabulatedParams>(params_);
            auto it = std::upper_bound(t.x.begin(), t.x.end(), x);
            std::size_t k = it == t.x.begin() ? 0 : static_cast<std::size_t>(it - t.x.begin()) - 1;
            k = std::min(k, t.x.size() - 2);
            const double w = (x - t.x[k]) / (t.x[k + 1] - t.x[k]);
            return t.y[k] + w * (t.y[k + 1] - t.y[k]);
        }
        default: return std::get<CallableParams>(params_).forward(x);
    }
}

double Branch::derivative(double x) const {
    switch (params_.index()) {
        case 0: return a_;
        case 1: {
            const double den = c_ * x + d_;
            return (a_ * d_ - b_ * c_) / (den * den);
        }
        case 2: {
            const auto& t = std::get<TabulatedParams>(params_);
            auto it = std::upper_bound(t.x.begin(), t.x.end(), x);
            std::size_t k = it == t.x.begin() ? 0 : static_cast<std::size_t>(it - t.x.begin()) - 1;
            k = std::min(k, t.x.size() - 2);
            return (t.y[k + 1] - t.y[k]) / (t.x[k + 1] - t.x[k]);
        }
        default: return std::get<CallableParams>(params_).derivative(x);
    }
}

double Branch::inverse(double y) const {
    y = std::clamp(y, range_.lo, range_.hi);
    double x;
    switch (params_.index()) {
        case 0: x = (y - b_) / a_; break;
        case 1: x = (d_ * y - b_) / (a_ - c_ * y); break;
        case 2: {
            const auto& t = std::get<TabulatedParams>(params_);
            std::size_t k = 0;
            if (orientation_ == Orientation::kIncreasing) {
                auto it = std::upper_bound(t.y.begin(), t.y.end(), y);
                k = it == t.y.begin() ? 0 : static_cast<std::size_t>(it - t.y.begin()) - 1;
            } else {
                auto it = std::upper_bound(t.y.begin(), t.y.end(), y, std::greater<>());
                k = it == t.y.begin() ? 0 : static_cast<std::size_t>(it - t.y.begin()) - 1;
            }
            k = std::min(k, t.y.size() - 2);
            const double w = (y - t.y[k]) / (t.y[k + 1] - t.y[k]);
            x = t.x[k] + w * (t.x[k + 1] - t.x[k]);
            break;
        }
        default: x = bisect_inverse(y); break;
    }
    return std::clamp(x, lo_d_, hi_d_);
}

// Bracket [lo, hi] always contains the preimage because the branch is monotone;
// the loop stops once the bracket cannot shrink any further in double precision.
double Branch::bisect_inverse(double y) const {
    double left = lo_d_;
    double right = hi_d_;
    const bool increasing = orientation_ == Orientation::kIncreasing;
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (left + right);
        if (mid <= left || mid >= right) break;
        const double fm = apply(mid);
        if ((fm < y) == increasing) {
            left = mid;
        } else {
            right = mid;
        }
    }
    return 0.5 * (left + right);
}

Interval Branch::preimage(const Interval& j) const {
    const Interval k = intersect(j, range_);
    if (k.is_empty()) return Interval::none();
    double x0;
    double x1;
    if (orientation_ == Orientation::kIncreasing) {
        x0 = k.lo <= range_.lo ? lo_d_ : inverse(k.lo);
        x1 = k.hi >= range_.hi ? hi_d_ : inverse(k.hi);
    } else {
        x0 = k.hi >= range_.hi ? lo_d_ : inverse(k.hi);
        x1 = k.lo <= range_.lo ? hi_d_ : inverse(k.lo);
    }
    if (x1 < x0) x1 = x0;
    return {x0, x1};
}

std::string Branch::describe() const {
    std::ostringstream os;
    os << to_string(kind()) << "[" << format_rational(lo_) << "," << format_rational(hi_) << "):";
    if (const auto* lin = linear_params()) {
        os << format_rational(lin->slope) << "," << format_rational(lin->intercept);
    } else if (const auto* m = moebius_params()) {
        os << format_rational(m->p) << "," << format_rational(m->q) << "," << format_rational(m->r) << ","
           << format_rational(m->s);
    } else if (const auto* t = tabulated_params()) {
        for (std::size_t k = 0; k < t->x.size(); ++k) {
            os << (k ? ";" : "") << format_double(t->x[k]) << "," << format_double(t->y[k]);
        }
    } else {
        os << std::get<CallableParams>(params_).description;
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// PiecewiseMap

PiecewiseMap::PiecewiseMap(std::vector<Branch> branches, Rational alpha0, Rational B0, std::string label,
                           ValidationOptions options)
    : branches_(std::move(branches)), alpha0_(std::move(alpha0)), B0_(std::move(B0)), label_(std::move(label)) {
    std::sort(branches_.begin(), branches_.end(),
              [](const Branch& a, const Branch& b) { return a.lo() < b.lo(); });
    validate(options);
    starts_.reserve(branches_.size());
    std::ostringstream canonical;
    canonical << "label=" << label_ << ";alpha0=" << format_rational(alpha0_) << ";B0=" << format_rational(B0_);
    for (const auto& b : branches_) {
        starts_.push_back(to_double(b.lo()));
        canonical << ";" << b.describe();
    }
    fingerprint_ = fingerprint_of(canonical.str());
}

void PiecewiseMap::validate(const ValidationOptions& options) const {
    if (branches_.empty()) throw Error(ErrorCode::kInvalidMap, "map has no branches");
    if (!(alpha0_ > 0 && alpha0_ < 1)) {
        throw Error(ErrorCode::kInvalidMap, "alpha0 must lie in (0,1), got " + format_rational(alpha0_));
    }
    if (B0_ < 0) throw Error(ErrorCode::kInvalidMap, "B0 must be nonnegative, got " + format_rational(B0_));

    if (branches_.front().lo() != 0) throw Error(ErrorCode::kInvalidMap, "branch domains must start at 0");
    if (branches_.back().hi() != 1) throw Error(ErrorCode::kInvalidMap, "branch domains must end at 1");
    for (std::size_t i = 1; i < branches_.size(); ++i) {
        if (branches_[i - 1].hi() != branches_[i].lo()) {
            throw Error(ErrorCode::kInvalidMap, "branch domains leave a gap or overlap at " +
                                                    format_rational(branches_[i - 1].hi()) + " / " +
                                                    format_rational(branches_[i].lo()));
        }
    }

    const double tol = options.tolerance;
    for (std::size_t i = 0; i < branches_.size(); ++i) {
        const Branch& b = branches_[i];
        const std::string where = "branch " + std::to_string(i);
        const Interval range = b.range();
        if (range.lo < -tol || range.hi > 1.0 + tol) {
            throw Error(ErrorCode::kInvalidMap, where + " maps outside [0,1]");
        }
        // Declared range versus the endpoint images of the forward map.
        const double f_lo = b.apply(b.domain().lo);
        const double f_hi = b.apply(b.domain().hi);
        if (std::abs(std::min(f_lo, f_hi) - range.lo) > tol || std::abs(std::max(f_lo, f_hi) - range.hi) > tol) {
            throw Error(ErrorCode::kInvalidMap, where + " range does not match its endpoint images");
        }

        const int n = std::max(options.expansion_samples, 2);
        const double lo = b.domain().lo;
        const double width = b.domain().hi - lo;
        double prev = b.apply(lo);
        for (int k = 0; k < n; ++k) {
            const double x = lo + width * (k + 0.5) / n;
            const double fx = b.apply(x);
            const bool ordered = b.orientation() == Orientation::kIncreasing ? fx > prev : fx < prev;
            if (!ordered) throw Error(ErrorCode::kInvalidMap, where + " is not strictly monotone");
            prev = fx;
            if (options.require_expansion && !(std::abs(b.derivative(x)) > 1.0)) {
                throw Error(ErrorCode::kInvalidMap, where + " is not expanding at x = " + format_double(x));
            }
        }

        if (b.kind() != BranchKind::kCallable) {
            const int m = std::max(options.roundtrip_samples, 2);
            for (int k = 0; k < m; ++k) {
                const double y = range.lo + (range.hi - range.lo) * k / (m - 1);
                const double back = b.apply(b.inverse(y));
                if (std::abs(back - y) > tol * std::max(1.0, std::abs(y))) {
                    throw Error(ErrorCode::kInvalidMap, where + " inverse round trip fails at y = " + format_double(y));
                }
            }
        }
    }
}

const Branch& PiecewiseMap::branch(std::size_t i) const {
    if (i >= branches_.size()) {
        throw Error(ErrorCode::kInvalidArgument, "branch index " + std::to_string(i) + " out of range");
    }
    return branches_[i];
}

std::size_t PiecewiseMap::branch_index(double x) const {
    if (!(x >= 0.0 && x < 1.0)) {
        throw Error(ErrorCode::kInvalidArgument, "point " + format_double(x) + " outside [0,1)");
    }
    auto it = std::upper_bound(starts_.begin(), starts_.end(), x);
    if (it == starts_.begin()) throw Error(ErrorCode::kDomainGap, "no branch contains " + format_double(x));
    const auto idx = static_cast<std::size_t>(it - starts_.begin()) - 1;
    if (!(x < branches_[idx].domain().hi)) {
        throw Error(ErrorCode::kDomainGap, "no branch contains " + format_double(x));
    }
    return idx;
}

double PiecewiseMap::evaluate(double x) const { return branches_[branch_index(x)].apply(x); }

Interval PiecewiseMap::branch_preimage(std::size_t i, const Interval& j) const { return branch(i).preimage(j); }

double PiecewiseMap::min_expansion(int samples_per_branch) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& b : branches_) {
        const double lo = b.domain().lo;
        const double width = b.domain().hi - lo;
        for (int k = 0; k < samples_per_branch; ++k) {
            const double x = lo + width * (k + 0.5) / samples_per_branch;
            best = std::min(best, std::abs(b.derivative(x)));
        }
    }
    return best;
}

bool PiecewiseMap::all_linear() const {
    return std::all_of(branches_.begin(), branches_.end(),
                       [](const Branch& b) { return b.kind() == BranchKind::kLinear; });
}

bool PiecewiseMap::is_linear_full_branch() const {
    return std::all_of(branches_.begin(), branches_.end(), [](const Branch& b) {
        const auto* lin = b.linear_params();
        if (!lin) return false;
        const Rational y0 = lin->slope * b.lo() + lin->intercept;
        const Rational y1 = lin->slope * b.hi() + lin->intercept;
        return (y0 == 0 && y1 == 1) || (y0 == 1 && y1 == 0);
    });
}

void PiecewiseMap::require_hole_uniform() const {
    if (!(alpha0_ * 3 < 1)) {
        throw Error(ErrorCode::kMode, "hole certification requires alpha0 < 1/3, got " + format_rational(alpha0_));
    }
}

LyInputs markov_linear_constants(const std::vector<Branch>& branches) {
    if (branches.empty()) throw Error(ErrorCode::kInvalidMap, "no branches");
    Rational beta = -1;
    for (const auto& b : branches) {
        const auto* lin = b.linear_params();
        if (!lin) throw Error(ErrorCode::kInvalidMap, "default LY constants need piecewise-linear branches");
        const Rational y0 = lin->slope * b.lo() + lin->intercept;
        const Rational y1 = lin->slope * b.hi() + lin->intercept;
        if (!((y0 == 0 && y1 == 1) || (y0 == 1 && y1 == 0))) {
            throw Error(ErrorCode::kInvalidMap, "default LY constants need every branch onto [0,1]");
        }
        const Rational s = abs(lin->slope);
        if (beta < 0 || s < beta) beta = s;
    }
    if (!(beta > 1)) throw Error(ErrorCode::kInvalidMap, "map is not expanding");
    return {Rational(1) / beta, Rational(0)};
}

}  // namespace ulamcert
