#include "ulamcert/certify.hpp"

#include "ulamcert/error.hpp"
#include "ulamcert/ulam.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>

namespace ulamcert {

SeparationResult separation_check(const std::vector<std::complex<double>>& eigenvalues, double r, double delta) {
    SeparationResult out;
    for (const auto& rho : eigenvalues) {
        if (std::abs(rho) <= r) continue;
        const double dist = std::abs(rho - 1.0);
        if (dist <= delta) {
            out.cluster.push_back(rho);
        } else if (!(dist > 2.0 * delta)) {
            out.pass = false;
            if (!out.witness) out.witness = rho;
        }
    }
    return out;
}

std::vector<std::int64_t> candidate_bins(std::int64_t max_bins) {
    std::vector<std::int64_t> out;
    for (std::int64_t scale = 1; scale <= max_bins; scale *= 10) {
        for (std::int64_t lead : {1, 2, 5}) {
            if (lead * scale <= max_bins) out.push_back(lead * scale);
        }
        if (scale > max_bins / 10) break;
    }
    return out;
}

std::int64_t bins_for_mesh_bound(double bound, std::int64_t current_bins, const std::vector<std::int64_t>& candidates) {
    for (std::int64_t c : candidates) {
        if (c > current_bins && 1.0 / static_cast<double>(c) <= bound) return c;
    }
    return 0;
}

MeshPlan refine_with_bootstrap(const LYConstants& ly_hole, const LYConstants& ly_closed, double r, double delta,
                               double H_coarse, std::int64_t coarse_bins,
                               const std::vector<std::int64_t>& candidates) {
    MeshPlan plan;
    plan.bootstrap_attempted = true;
    const double mesh = 1.0 / static_cast<double>(coarse_bins);
    try {
        plan.bootstrap = bootstrap_resolvent_bound(ly_closed, r, delta, H_coarse, mesh);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::kPrecondition) throw;
        plan.message = std::string(e.what()) + "; halving the mesh";
        plan.n_bins = 2 * coarse_bins;
        return plan;
    }
    plan.bootstrap_used = true;
    plan.predicted = kl_constants(ly_hole, r, delta, plan.bootstrap->transferred_bound);
    if (mesh <= plan.predicted->scaled_epsilon0) {
        plan.n_bins = coarse_bins;
        plan.message = "coarse mesh already below the predicted bound";
        return plan;
    }
    const std::int64_t next = bins_for_mesh_bound(plan.predicted->scaled_epsilon0, coarse_bins, candidates);
    if (next == 0) {
        plan.n_bins = 2 * coarse_bins;
        plan.message = "no configured mesh below the predicted bound; halving the mesh";
    } else {
        plan.n_bins = next;
        plan.message = "mesh chosen from the transferred bound";
    }
    return plan;
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace

CertificationReport run_certification(const PiecewiseMap& map, const CertificationConfig& config) {
    map.require_hole_uniform();
    if (!(config.ell > 0 && config.ell < 1)) throw Error(ErrorCode::kDomain, "ell must lie in (0,1)");
    if (config.bins_init <= 0) throw Error(ErrorCode::kInvalidArgument, "bins_init must be positive");
    if (config.max_inner <= 0 || config.max_outer <= 0) {
        throw Error(ErrorCode::kInvalidArgument, "iteration caps must be positive");
    }
    const LYConstants ly_hole = ly_constants(map.alpha0(), map.B0(), LyMode::kHoleUniform);
    const LYConstants ly_closed = ly_constants(map.alpha0(), map.B0(), LyMode::kClosedOnly);
    const Rational r_exact = 1 - config.ell;
    const double r = to_double(r_exact);
    if (!(r > ly_hole.alpha)) {
        throw Error(ErrorCode::kDomain, "ell must be below 1 - alpha = " + fmt(1.0 - ly_hole.alpha));
    }

    BigInt k;
    if (config.delta_init) {
        const Rational& d = *config.delta_init;
        if (!(d > 0) || boost::multiprecision::numerator(d) != 1) {
            throw Error(ErrorCode::kInvalidArgument, "delta_init must be of the form 1/k");
        }
        k = boost::multiprecision::denominator(d);
    } else {
        k = boost::multiprecision::numerator(ceil(Rational(1) / config.ell)) + 1;
    }
    if (!(Rational(1, k) < config.ell)) throw Error(ErrorCode::kInvalidArgument, "delta_init must be below ell");

    CertificationReport report;
    report.map_label = map.label();
    report.map_fingerprint = map.fingerprint();
    report.ell = config.ell;
    report.r = r_exact;
    report.ly = ly_hole;
    report.escape_guarantee = -std::log(1.0 - to_double(config.ell));
    report.theorem2_coefficient = 1.0 + (2.0 * ly_hole.alpha0 + ly_hole.B0) / (1.0 - to_double(config.ell) - ly_hole.alpha);

    const auto candidates = candidate_bins(config.max_bins);
    std::map<std::int64_t, ProvidedSpectrum> spectra;
    auto spectrum_for = [&](std::int64_t n) -> const ProvidedSpectrum& {
        auto it = spectra.find(n);
        if (it != spectra.end() && it->second.data.r <= r) return it->second;
        ProvidedSpectrum got;
        if (config.provider) {
            got = config.provider(n, r);
        } else {
            const UlamMatrix P = build_closed(map, UlamPartition(n));
            got = {eigen_analysis(P, r, config.spectral), "computed"};
        }
        return spectra[n] = std::move(got);
    };
    auto say = [&](const std::string& msg) {
        if (config.progress) config.progress(msg);
    };

    std::int64_t n = config.bins_init;
    for (int outer = 1; outer <= config.max_outer; ++outer) {
        const Rational delta_exact(1, k);
        const double delta = to_double(delta_exact);
        std::optional<double> transferred;
        std::int64_t coarse_bins = 0;
        std::vector<std::complex<double>> coarse_eigenvalues;
        bool restart_outer = false;
        for (int inner = 1; inner <= config.max_inner; ++inner) {
            if (n > config.max_bins) {
                report.reason = "mesh refinement exceeded " + std::to_string(config.max_bins) + " bins";
                return report;
            }
            const auto t0 = std::chrono::steady_clock::now();
            IterationRecord rec;
            rec.outer = outer;
            rec.inner = inner;
            rec.n_bins = n;
            rec.mesh = Rational(1, n);
            rec.delta = delta_exact;
            rec.k = k.convert_to<std::int64_t>();
            const double mesh = 1.0 / static_cast<double>(n);

            if (transferred && n >= coarse_bins) {
                rec.h_source = "transferred";
                rec.H = *transferred;
                rec.eigenvalues = coarse_eigenvalues;
                rec.eigenvalues_inherited = true;
            } else {
                say("spectral analysis at " + std::to_string(n) + " bins");
                const ProvidedSpectrum& sp = spectrum_for(n);
                rec.h_source = sp.source;
                rec.resolvent = h_star(sp.data, r, delta, ly_hole.alpha0, ly_hole.B0);
                rec.H = rec.resolvent->h_star;
                rec.q_power_norms = sp.data.q_power_norms;
                rec.eigenvalues = sp.data.eigenvalues_above_r;
            }
            rec.kl = kl_constants(ly_hole, r, delta, rec.H);
            rec.step7_pass = mesh <= rec.kl.scaled_epsilon0;
            say("n = " + std::to_string(n) + ", H = " + fmt(rec.H) + ", (2 Gamma)^-1 eps0 = " +
                fmt(rec.kl.scaled_epsilon0) + (rec.step7_pass ? " pass" : " fail"));

            if (!rec.step7_pass) {
                MeshPlan plan;
                if (config.use_bootstrap && !transferred) {
                    plan = refine_with_bootstrap(ly_hole, ly_closed, r, delta, rec.H, n, candidates);
                    if (plan.bootstrap_used) {
                        transferred = plan.bootstrap->transferred_bound;
                        coarse_bins = n;
                        coarse_eigenvalues = rec.eigenvalues;
                    }
                } else {
                    const std::int64_t next = bins_for_mesh_bound(rec.kl.scaled_epsilon0, n, candidates);
                    plan.n_bins = next != 0 ? next : 2 * n;
                    plan.message = next != 0 ? "mesh chosen from the current bound" : "halving the mesh";
                }
                rec.outcome = "reduce epsilon";
                n = plan.n_bins;
                rec.plan = std::move(plan);
                rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                report.iterations.push_back(std::move(rec));
                continue;
            }

            rec.separation = separation_check(rec.eigenvalues, r, delta);
            rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            if (rec.separation->pass) {
                rec.outcome = "certified";
                report.status = CertificationStatus::kCertified;
                report.delta_com = delta_exact;
                report.epsilon_com = rec.mesh;
                report.final_bins = n;
                report.hole_bound = ly_hole.Gamma_exact * rec.mesh;
                report.final_H = rec.H;
                report.final_scaled_epsilon0 = rec.kl.scaled_epsilon0;
                report.iterations.push_back(std::move(rec));
                return report;
            }
            rec.outcome = "reduce delta";
            report.iterations.push_back(std::move(rec));
            k *= 2;
            restart_outer = true;
            break;
        }
        if (!restart_outer) {
            report.reason = "inner iteration cap reached at " + std::to_string(n) + " bins";
            return report;
        }
    }
    report.reason = "outer iteration cap reached";
    return report;
}

CertificateBounds certificate_bounds(const CertificationReport& report, const Rational& hole_measure) {
    if (!report.certified()) throw Error(ErrorCode::kPrecondition, "certificate bounds need a certified report");
    if (hole_measure < 0) throw Error(ErrorCode::kInvalidArgument, "hole measure must be nonnegative");
    CertificateBounds out;
    out.accim_exists = hole_measure <= report.hole_bound;
    const double linear = report.theorem2_coefficient * to_double(hole_measure);
    out.one_minus_eH_upper = std::min(to_double(report.delta_com), linear);
    out.escape_upper = -std::log1p(-out.one_minus_eH_upper);
    return out;
}

}  // namespace ulamcert
