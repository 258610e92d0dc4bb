#include "ulamcert/report.hpp"

#include "ulamcert/error.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <unistd.h>

namespace ulamcert {

using nlohmann::json;

namespace {

json complex_list(const std::vector<std::complex<double>>& values) {
    json out = json::array();
    for (const auto& v : values) out.push_back({v.real(), v.imag()});
    return out;
}

std::vector<std::complex<double>> complex_list_from(const json& arr) {
    std::vector<std::complex<double>> out;
    for (const auto& v : arr) out.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
    return out;
}

std::string g(double v, int digits = 10) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

Rational rational_pow(const Rational& base, int e) {
    Rational out = 1;
    for (int i = 0; i < e; ++i) out *= base;
    return out;
}

}  // namespace

json to_json(const RunManifest& m, bool include_timings) {
    json out;
    out["subcommand"] = m.subcommand;
    out["tool_version"] = kToolVersion;
    if (!m.map_path.empty()) {
        out["map"] = {{"path", m.map_path}, {"hash", m.map_hash}, {"fingerprint", m.map_fingerprint}};
    }
    out["parameters"] = m.parameters;
    out["cache_hits"] = m.cache_hits;
    if (include_timings) {
        json t = json::array();
        for (const auto& [phase, seconds] : m.timings) t.push_back({{"phase", phase}, {"seconds", seconds}});
        out["timings"] = t;
    }
    return out;
}

json to_json(const LYConstants& ly) {
    return {{"mode", to_string(ly.mode)},
            {"alpha0", format_rational(ly.alpha0_exact)},
            {"B0", format_rational(ly.B0_exact)},
            {"alpha", ly.alpha},
            {"B", ly.B},
            {"B_cross_check", ly.B_cross_check},
            {"B_hat", ly.B_hat},
            {"A", ly.A},
            {"D", ly.D},
            {"Gamma", format_rational(ly.Gamma_exact)},
            {"Gamma_value", ly.Gamma}};
}

json to_json(const KLConstants& k) {
    return {{"r", k.r},         {"delta", k.delta},       {"H", k.H},
            {"n1", k.n1},       {"C", k.C},               {"n2", k.n2},
            {"n2_raw", k.n2_raw}, {"gamma", k.gamma},     {"epsilon1", k.epsilon1},
            {"epsilon0", k.epsilon0}, {"scaled_epsilon0", k.scaled_epsilon0}, {"a", k.a},
            {"b", k.b},         {"transfer_bound", k.transfer_bound}};
}

json to_json(const ResolventBound& b) {
    return {{"r", b.r},
            {"delta", b.delta},
            {"neumann_bound", b.neumann_bound},
            {"resolvent_l1_bound", b.resolvent_l1_bound},
            {"h_star", b.h_star},
            {"truncation_N", b.truncation_N},
            {"tail_ratio", b.tail_ratio}};
}

json to_json(const SpectralData& d, bool include_density) {
    json out = {{"n_bins", d.n_bins},
                {"r", d.r},
                {"eigenvalues_above_r", complex_list(d.eigenvalues_above_r)},
                {"residuals", d.residuals},
                {"subdominant_modulus", d.subdominant_modulus},
                {"density_residual", d.density_residual},
                {"projection_norm", d.projection_norm},
                {"q_power_norms", d.q_power_norms},
                {"truncation_N", d.truncation_N},
                {"convention", to_string(d.convention)},
                {"q_radius_bound", d.q_radius_bound},
                {"method", d.method},
                {"eigen_iterations", d.eigen_iterations}};
    if (include_density) out["invariant_density"] = d.invariant_density;
    return out;
}

SpectralData spectral_from_json(const json& doc) {
    try {
        SpectralData d;
        d.n_bins = doc.at("n_bins").get<std::int64_t>();
        d.r = doc.at("r").get<double>();
        d.eigenvalues_above_r = complex_list_from(doc.at("eigenvalues_above_r"));
        d.residuals = doc.at("residuals").get<std::vector<double>>();
        d.subdominant_modulus = doc.at("subdominant_modulus").get<double>();
        d.density_residual = doc.at("density_residual").get<double>();
        d.projection_norm = doc.at("projection_norm").get<double>();
        d.q_power_norms = doc.at("q_power_norms").get<std::vector<double>>();
        d.truncation_N = doc.at("truncation_N").get<int>();
        d.convention = parse_convention(doc.at("convention").get<std::string>());
        d.q_radius_bound = doc.at("q_radius_bound").get<double>();
        d.method = doc.at("method").get<std::string>();
        d.eigen_iterations = doc.at("eigen_iterations").get<int>();
        d.invariant_density = doc.at("invariant_density").get<std::vector<double>>();
        return d;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::kParse, std::string("spectral data: ") + e.what());
    }
}

json to_json(const SeparationResult& s) {
    json out = {{"pass", s.pass}, {"cluster", complex_list(s.cluster)}};
    out["witness"] = s.witness ? json{s.witness->real(), s.witness->imag()} : json(nullptr);
    return out;
}

json to_json(const IterationRecord& rec) {
    json out = {{"outer", rec.outer},
                {"inner", rec.inner},
                {"n_bins", rec.n_bins},
                {"mesh", format_rational(rec.mesh)},
                {"delta", format_rational(rec.delta)},
                {"k", rec.k},
                {"h_source", rec.h_source},
                {"H", rec.H},
                {"kl", to_json(rec.kl)},
                {"step7_pass", rec.step7_pass},
                {"eigenvalues", complex_list(rec.eigenvalues)},
                {"eigenvalues_inherited", rec.eigenvalues_inherited},
                {"outcome", rec.outcome}};
    out["resolvent"] = rec.resolvent ? to_json(*rec.resolvent) : json(nullptr);
    out["q_power_norms"] = rec.q_power_norms;
    out["step10"] = rec.separation ? to_json(*rec.separation) : json(nullptr);
    if (rec.plan) {
        json plan = {{"next_bins", rec.plan->n_bins},
                     {"bootstrap_attempted", rec.plan->bootstrap_attempted},
                     {"bootstrap_used", rec.plan->bootstrap_used},
                     {"message", rec.plan->message}};
        if (rec.plan->bootstrap) {
            plan["closed_only"] = to_json(rec.plan->bootstrap->closed);
            plan["closed_only_check_value"] = rec.plan->bootstrap->check_value;
            plan["transferred_bound"] = rec.plan->bootstrap->transferred_bound;
        }
        if (rec.plan->predicted) plan["predicted"] = to_json(*rec.plan->predicted);
        out["plan"] = plan;
    } else {
        out["plan"] = nullptr;
    }
    return out;
}

json to_json(const CertificationReport& r) {
    json out = {{"status", r.certified() ? "certified" : "failed"},
                {"reason", r.reason},
                {"map", {{"label", r.map_label}, {"fingerprint", r.map_fingerprint}}},
                {"ell", format_rational(r.ell)},
                {"r", format_rational(r.r)},
                {"ly", to_json(r.ly)},
                {"escape_guarantee", r.escape_guarantee},
                {"theorem2_coefficient", r.theorem2_coefficient}};
    if (r.certified()) {
        out["delta_com"] = format_rational(r.delta_com);
        out["epsilon_com"] = format_rational(r.epsilon_com);
        out["epsilon_com_value"] = to_double(r.epsilon_com);
        out["hole_bound"] = format_rational(r.hole_bound);
        out["hole_bound_value"] = to_double(r.hole_bound);
        out["final_bins"] = r.final_bins;
        out["final_H"] = r.final_H;
        out["final_scaled_epsilon0"] = r.final_scaled_epsilon0;
    }
    json log = json::array();
    for (const auto& rec : r.iterations) log.push_back(to_json(rec));
    out["iterations"] = log;
    return out;
}

json to_json(const CertificateBounds& b) {
    return {{"accim_exists", b.accim_exists},
            {"one_minus_eH_upper", b.one_minus_eH_upper},
            {"escape_upper", b.escape_upper}};
}

json to_json(const EscapeEstimate& e, bool include_density) {
    json out = {{"hole", {format_rational(e.hole.a), format_rational(e.hole.b)}},
                {"hole_measure", to_double(e.hole.measure())},
                {"n_bins", e.n_bins},
                {"e_H", e.e_H},
                {"escape_rate", e.total_escape ? json(nullptr) : json(e.escape_rate)},
                {"total_escape", e.total_escape},
                {"solver_residual", e.solver_residual},
                {"iterations", e.iterations}};
    if (include_density) out["accim_density"] = e.accim_density;
    return out;
}

json to_json(const OrbitClass& o) {
    return {{"periodic", o.periodic}, {"period", o.period}, {"derivative", o.derivative},
            {"exact", o.exact},       {"ambiguous", o.ambiguous}, {"note", o.note}};
}

json to_json(const AsymptoticRatioExperiment& ex) {
    json holes = json::array();
    for (const auto& h : ex.holes) {
        holes.push_back({{"width", format_rational(h.width)},
                         {"n_bins", h.n_bins},
                         {"hole", {format_rational(h.hole.a), format_rational(h.hole.b)}},
                         {"e_H", h.e_H},
                         {"escape_rate", h.escape_rate},
                         {"ratio", h.ratio}});
    }
    return {{"y", format_rational(ex.y)},
            {"bins_per_hole", ex.bins_per_hole},
            {"holes", holes},
            {"nested", ex.nested},
            {"extrapolated_limit", ex.extrapolated_limit},
            {"slope", ex.slope},
            {"low_confidence", ex.low_confidence},
            {"orbit", to_json(ex.orbit)},
            {"density_at_y", ex.density_at_y},
            {"density_analytic", ex.density_analytic},
            {"predicted_limit", ex.predicted_limit},
            {"assumptions", ex.assumptions}};
}

std::string certification_table(const CertificationReport& report) {
    std::vector<std::string> labels = {"iteration", "r", "delta", "epsilon", "H", "H source", "n1", "C",
                                       "n2", "(2 Gamma)^-1 eps0", "step 7", "eigenvalues > r", "step 10",
                                       "outcome"};
    std::vector<std::vector<std::string>> cols;
    for (const auto& rec : report.iterations) {
        std::string eig;
        for (const auto& v : rec.eigenvalues) {
            if (!eig.empty()) eig += " ";
            eig += v.imag() == 0.0 ? g(v.real(), 8) : g(v.real(), 6) + (v.imag() < 0 ? "" : "+") + g(v.imag(), 6) + "i";
        }
        if (rec.eigenvalues_inherited) eig += " (inherited)";
        const Rational C = rational_pow(1 / report.r, rec.kl.n1);
        cols.push_back({std::to_string(rec.outer) + "." + std::to_string(rec.inner), format_rational(report.r),
                        format_rational(rec.delta), format_rational(rec.mesh), g(rec.H), rec.h_source,
                        std::to_string(rec.kl.n1), format_rational(C), std::to_string(rec.kl.n2),
                        g(rec.kl.scaled_epsilon0, 13), rec.step7_pass ? "pass" : "fail", eig,
                        rec.separation ? (rec.separation->pass ? "pass" : "fail") : "-", rec.outcome});
    }
    std::size_t label_width = 0;
    for (const auto& l : labels) label_width = std::max(label_width, l.size());
    std::vector<std::size_t> widths;
    for (const auto& c : cols) {
        std::size_t w = 0;
        for (const auto& cell : c) w = std::max(w, cell.size());
        widths.push_back(w);
    }
    std::ostringstream os;
    for (std::size_t row = 0; row < labels.size(); ++row) {
        os << std::left << std::setw(static_cast<int>(label_width)) << labels[row];
        for (std::size_t c = 0; c < cols.size(); ++c) {
            os << " | " << std::setw(static_cast<int>(widths[c])) << cols[c][row];
        }
        os << "\n";
    }
    if (report.certified()) {
        os << "certified: epsilon_com = " << format_rational(report.epsilon_com)
           << ", delta_com = " << format_rational(report.delta_com)
           << ", hole bound = " << format_rational(report.hole_bound) << " (" << g(to_double(report.hole_bound))
           << "), escape rate < " << g(report.escape_guarantee) << "\n";
    } else {
        os << "not certified: " << report.reason << "\n";
    }
    return os.str();
}

void write_file_atomic(const std::string& path, const std::string& text) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
        if (!out) throw Error(ErrorCode::kIo, "cannot write '" + tmp.string() + "'");
        out << text;
        if (!out) throw Error(ErrorCode::kIo, "failed writing '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw Error(ErrorCode::kIo, "cannot rename into '" + path + "': " + ec.message());
    }
}

}  // namespace ulamcert
