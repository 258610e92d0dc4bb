#include "ulamcert/cache.hpp"
#include "ulamcert/certify.hpp"
#include "ulamcert/error.hpp"
#include "ulamcert/escape.hpp"
#include "ulamcert/kl.hpp"
#include "ulamcert/map_config.hpp"
#include "ulamcert/report.hpp"
#include "ulamcert/reproduce.hpp"
#include "ulamcert/spectral.hpp"
#include "ulamcert/ulam.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace ulamcert;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string g12(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

/// "a,b" -> Hole
Hole parse_hole(const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos) throw Error(ErrorCode::kParse, "hole must be given as a,b");
    return Hole(parse_rational(text.substr(0, comma)), parse_rational(text.substr(comma + 1)));
}

std::vector<Rational> parse_list(const std::string& text) {
    std::vector<Rational> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_rational(item));
    if (out.empty()) throw Error(ErrorCode::kParse, "empty list");
    return out;
}

void emit(const json& doc, const std::string& out_path) {
    const std::string text = doc.dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
    } else {
        write_file_atomic(out_path, text);
    }
}

RunManifest manifest_for(const std::string& sub, const LoadedMap* map) {
    RunManifest m;
    m.subcommand = sub;
    if (map) {
        m.map_path = map->path;
        m.map_hash = map->config_hash;
        m.map_fingerprint = map->map.fingerprint();
        m.parameters["alpha0"] = format_rational(map->map.alpha0());
        m.parameters["B0"] = format_rational(map->map.B0());
    }
    return m;
}

std::string default_map_path() { return std::string(ULAMCERT_DATA_DIR) + "/ten_branch_map.json"; }

struct SpectralFlags {
    int N = 5;
    std::string convention = "column-sum";
    std::int64_t dense_limit = 1000;

    SpectralOptions options() const {
        SpectralOptions o;
        o.truncation_N = N;
        o.convention = parse_convention(convention);
        o.dense_limit = dense_limit;
        return o;
    }
    void add(CLI::App* app) {
        app->add_option("--N", N, "Neumann truncation index")->capture_default_str();
        app->add_option("--convention", convention, "Q-power norm convention: column-sum | row-sum")
            ->capture_default_str();
        app->add_option("--dense-limit", dense_limit, "largest matrix handled by the dense eigensolver")
            ->capture_default_str();
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ulam-method certification of escape rates for interval maps with small holes"};
    app.require_subcommand(1);
    std::string cache_dir = Cache::default_directory();
    app.add_option("--cache-dir", cache_dir, "cache directory (default: $ULAMCERT_CACHE_DIR or .ulamcert-cache)");

    // ulam-matrix
    auto* um = app.add_subcommand("ulam-matrix", "assemble a closed or open Ulam matrix");
    std::string um_map, um_hole, um_out;
    std::int64_t um_bins = 0;
    um->add_option("--map", um_map, "map config (JSON)")->required();
    um->add_option("--bins", um_bins, "number of bins")->required();
    um->add_option("--hole", um_hole, "hole a,b (aligned to the partition)");
    um->add_option("--out", um_out, "output matrix file")->required();

    // spectral
    auto* sp = app.add_subcommand("spectral", "spectral data and resolvent bound of a closed matrix");
    std::string sp_matrix, sp_r, sp_delta, sp_map, sp_alpha0, sp_b0, sp_out;
    SpectralFlags sp_flags;
    sp->add_option("--matrix", sp_matrix, "matrix file written by ulam-matrix")->required();
    sp->add_option("--r", sp_r, "radius r (rational)")->required();
    sp->add_option("--delta", sp_delta, "delta (rational)")->required();
    sp->add_option("--map", sp_map, "map config supplying alpha0 and B0");
    sp->add_option("--alpha0", sp_alpha0, "alpha0 (rational), overrides --map");
    sp->add_option("--B0", sp_b0, "B0 (rational), overrides --map");
    sp->add_option("--out", sp_out, "write JSON report here");
    sp_flags.add(sp);

    // kl-constants
    auto* kc = app.add_subcommand("kl-constants", "perturbation constant chain");
    std::string kc_alpha0, kc_b0, kc_r, kc_delta;
    double kc_H = 0.0;
    bool kc_closed = false, kc_json = false;
    kc->add_option("--alpha0", kc_alpha0)->required();
    kc->add_option("--B0", kc_b0)->required();
    kc->add_option("--r", kc_r)->required();
    kc->add_option("--delta", kc_delta)->required();
    kc->add_option("--H", kc_H, "resolvent bound")->required();
    kc->add_flag("--closed-only", kc_closed, "use the closed-only constants");
    kc->add_flag("--json", kc_json, "print JSON instead of text");

    // certify
    auto* ce = app.add_subcommand("certify", "run the certification loop");
    std::string ce_map, ce_ell, ce_delta, ce_out;
    std::int64_t ce_bins = 1000;
    int ce_inner = 12, ce_outer = 8;
    bool ce_no_boot = false, ce_no_cache = false;
    SpectralFlags ce_flags;
    ce->add_option("--map", ce_map, "map config (JSON)")->required();
    ce->add_option("--ell", ce_ell, "escape tolerance ell (rational)")->required();
    ce->add_option("--delta-init", ce_delta, "initial delta 1/k");
    ce->add_option("--bins-init", ce_bins, "initial number of bins")->capture_default_str();
    ce->add_option("--max-inner", ce_inner)->capture_default_str();
    ce->add_option("--max-outer", ce_outer)->capture_default_str();
    ce->add_flag("--no-bootstrap", ce_no_boot, "disable the resolvent transfer");
    ce->add_flag("--no-cache", ce_no_cache, "do not read or write the cache");
    ce->add_option("--out", ce_out, "write JSON report here");
    ce_flags.add(ce);

    // escape
    auto* es = app.add_subcommand("escape", "escape rate of a concrete hole");
    std::string es_map, es_hole, es_out, es_cert;
    std::int64_t es_bins = 0;
    bool es_density = false;
    es->add_option("--map", es_map, "map config (JSON)")->required();
    es->add_option("--bins", es_bins, "number of bins")->required();
    es->add_option("--hole", es_hole, "hole a,b")->required();
    es->add_option("--certificate", es_cert, "certification report to evaluate the hole against");
    es->add_flag("--density", es_density, "include the density in the JSON");
    es->add_option("--out", es_out, "write JSON report here");

    // hole-asymptotics
    auto* ha = app.add_subcommand("hole-asymptotics", "escape ratios for holes shrinking to a point");
    std::string ha_map, ha_point, ha_widths, ha_out;
    std::int64_t ha_k = 10;
    ha->add_option("--map", ha_map, "map config (JSON)")->required();
    ha->add_option("--point", ha_point, "point y (rational or decimal)")->required();
    ha->add_option("--widths", ha_widths, "decreasing widths w1,w2,...")->required();
    ha->add_option("--bins-per-hole", ha_k, "bins covered by each hole")->capture_default_str();
    ha->add_option("--out", ha_out, "write JSON report here");

    // reproduce-tables
    auto* rt = app.add_subcommand("reproduce-tables", "rerun both reference certifications and diff the tables");
    std::string rt_map = default_map_path(), rt_dir = ".";
    std::int64_t rt_bins = 5000;
    bool rt_no_cache = false;
    rt->add_option("--map", rt_map, "map config")->capture_default_str();
    rt->add_option("--out-dir", rt_dir, "directory for table1.json and table2.json")->capture_default_str();
    rt->add_option("--bins-init", rt_bins)->capture_default_str();
    rt->add_flag("--no-cache", rt_no_cache, "do not read or write the cache");

    // cache
    auto* ca = app.add_subcommand("cache", "list, purge or inspect cached matrices and spectra");
    std::string ca_action, ca_name;
    ca->add_option("action", ca_action, "list | purge | inspect")->required()->check(
        CLI::IsMember({"list", "purge", "inspect"}));
    ca->add_option("name", ca_name, "entry name for inspect");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const Cache cache(cache_dir);
        const auto t_start = Clock::now();

        if (*um) {
            const LoadedMap lm = load_map(um_map);
            const UlamPartition partition(um_bins);
            UlamMatrix m = um_hole.empty() ? build_closed(lm.map, partition)
                                           : build_open(lm.map, partition, parse_hole(um_hole));
            save_matrix(m, um_out);
            double dev = 0.0;
            for (double s : m.row_sums()) {
                if (s != 0.0) dev = std::max(dev, std::abs(s - 1.0));
            }
            RunManifest man = manifest_for("ulam-matrix", &lm);
            man.parameters["bins"] = std::to_string(um_bins);
            if (m.hole) man.parameters["hole"] = m.hole->describe();
            man.timings.push_back({"assembly", seconds_since(t_start)});
            json doc = {{"manifest", to_json(man)},
                        {"out", um_out},
                        {"n_bins", um_bins},
                        {"nnz", m.P.nonZeros()},
                        {"mode", m.mode == MatrixMode::kClosed ? "closed" : "open"},
                        {"max_row_sum_deviation", dev}};
            std::cout << doc.dump(2) << "\n";
            return 0;
        }

        if (*sp) {
            std::vector<std::string> warnings;
            std::optional<LoadedMap> lm;
            if (!sp_map.empty()) lm = load_map(sp_map);
            const UlamMatrix m = load_matrix(sp_matrix, lm ? lm->map.fingerprint() : std::string(), &warnings);
            for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
            const Rational r = parse_rational(sp_r);
            const Rational delta = parse_rational(sp_delta);
            const SpectralData data = eigen_analysis(m, to_double(r), sp_flags.options());
            RunManifest man = manifest_for("spectral", lm ? &*lm : nullptr);
            man.parameters["matrix"] = sp_matrix;
            man.parameters["r"] = format_rational(r);
            man.parameters["delta"] = format_rational(delta);
            man.parameters["N"] = std::to_string(sp_flags.N);
            man.parameters["convention"] = sp_flags.convention;
            json doc = {{"spectral", to_json(data, false)}};
            std::optional<Rational> a0, b0;
            if (lm) {
                a0 = lm->map.alpha0();
                b0 = lm->map.B0();
            }
            if (!sp_alpha0.empty()) a0 = parse_rational(sp_alpha0);
            if (!sp_b0.empty()) b0 = parse_rational(sp_b0);
            int N_used = 0;
            const double neumann = neumann_bound(data, to_double(r), &N_used);
            doc["neumann_bound"] = neumann;
            std::cout << "operator norm ||P||_1 = " << g12(operator_l1_norm(m.P)) << "\n";
            std::cout << "eigenvalues above r:";
            for (const auto& v : data.eigenvalues_above_r) std::cout << " " << v;
            std::cout << "\nneumann bound (N = " << N_used << ") = " << g12(neumann) << "\n";
            if (a0 && b0) {
                man.parameters["alpha0"] = format_rational(*a0);
                man.parameters["B0"] = format_rational(*b0);
                const ResolventBound rb = h_star(data, to_double(r), to_double(delta), to_double(*a0), to_double(*b0));
                doc["resolvent"] = to_json(rb);
                std::cout << "H* = " << g12(rb.h_star) << "\n";
            } else {
                std::cout << "H* not computed: supply --map or --alpha0/--B0\n";
            }
            man.timings.push_back({"spectral", seconds_since(t_start)});
            doc["manifest"] = to_json(man);
            if (!sp_out.empty()) emit(doc, sp_out);
            return 0;
        }

        if (*kc) {
            const LYConstants ly = ly_constants(parse_rational(kc_alpha0), parse_rational(kc_b0),
                                                kc_closed ? LyMode::kClosedOnly : LyMode::kHoleUniform);
            const KLConstants k = kl_constants(ly, to_double(parse_rational(kc_r)), to_double(parse_rational(kc_delta)), kc_H);
            if (kc_json) {
                std::cout << json{{"ly", to_json(ly)}, {"kl", to_json(k)}}.dump(2) << "\n";
                return 0;
            }
            std::cout << "mode              " << to_string(ly.mode) << "\n"
                      << "alpha             " << g12(ly.alpha) << "\n"
                      << "B                 " << g12(ly.B) << "\n"
                      << "B_hat             " << g12(ly.B_hat) << "\n"
                      << "A                 " << g12(ly.A) << "\n"
                      << "D                 " << g12(ly.D) << "\n"
                      << "Gamma             " << format_rational(ly.Gamma_exact) << "\n"
                      << "n1                " << k.n1 << "\n"
                      << "C                 " << g12(k.C) << "\n"
                      << "n2                " << k.n2 << "\n"
                      << "gamma             " << g12(k.gamma) << "\n"
                      << "epsilon1          " << g12(k.epsilon1) << "\n"
                      << "epsilon0          " << g12(k.epsilon0) << "\n"
                      << "(2 Gamma)^-1 eps0 " << g12(k.scaled_epsilon0) << "\n"
                      << "a                 " << g12(k.a) << "\n"
                      << "b                 " << g12(k.b) << "\n"
                      << "transfer bound    " << g12(k.transfer_bound) << "\n";
            return 0;
        }

        if (*ce || *rt) {
            const LoadedMap lm = load_map(*ce ? ce_map : rt_map);
            CertificationConfig config;
            std::vector<std::string> hits;
            if (*ce) {
                config.ell = parse_rational(ce_ell);
                if (!ce_delta.empty()) config.delta_init = parse_rational(ce_delta);
                config.bins_init = ce_bins;
                config.max_inner = ce_inner;
                config.max_outer = ce_outer;
                config.use_bootstrap = !ce_no_boot;
                config.spectral = ce_flags.options();
            } else {
                config.bins_init = rt_bins;
            }
            const bool use_cache = *ce ? !ce_no_cache : !rt_no_cache;
            if (use_cache) config.provider = cached_spectrum_provider(lm.map, config.spectral, cache, &hits);
            config.progress = [](const std::string& msg) { std::cerr << msg << "\n"; };

            if (*ce) {
                const CertificationReport rep = run_certification(lm.map, config);
                RunManifest man = manifest_for("certify", &lm);
                man.parameters["ell"] = format_rational(config.ell);
                man.parameters["bins_init"] = std::to_string(config.bins_init);
                man.parameters["max_inner"] = std::to_string(config.max_inner);
                man.parameters["max_outer"] = std::to_string(config.max_outer);
                man.parameters["bootstrap"] = config.use_bootstrap ? "on" : "off";
                man.parameters["N"] = std::to_string(config.spectral.truncation_N);
                man.parameters["convention"] = to_string(config.spectral.convention);
                if (config.delta_init) man.parameters["delta_init"] = format_rational(*config.delta_init);
                man.cache_hits = hits;
                man.timings.push_back({"certification", seconds_since(t_start)});
                json doc = to_json(rep);
                doc["manifest"] = to_json(man);
                std::cout << certification_table(rep);
                if (!ce_out.empty()) emit(doc, ce_out);
                return rep.certified() ? 0 : 1;
            }

            const TableReproduction rep = reproduce_tables(lm.map, config);
            RunManifest man = manifest_for("reproduce-tables", &lm);
            man.parameters["bins_init"] = std::to_string(config.bins_init);
            man.cache_hits = hits;
            man.timings.push_back({"reproduction", seconds_since(t_start)});
            std::filesystem::create_directories(rt_dir);
            json cells = json::array();
            for (const auto& c : rep.cells) cells.push_back(to_json(c));
            json d1 = to_json(rep.table1);
            d1["manifest"] = to_json(man);
            json d2 = to_json(rep.table2);
            d2["manifest"] = to_json(man);
            emit(d1, (std::filesystem::path(rt_dir) / "table1.json").string());
            emit(d2, (std::filesystem::path(rt_dir) / "table2.json").string());
            emit(json{{"cells", cells}, {"pass", rep.pass()}, {"manifest", to_json(man)}},
                 (std::filesystem::path(rt_dir) / "table_diff.json").string());
            std::cout << "ell = 1/25\n" << certification_table(rep.table1) << "\n";
            std::cout << "ell = 1/40\n" << certification_table(rep.table2) << "\n";
            std::cout << cells_table(rep.cells);
            std::cout << (rep.pass() ? "reproduction: ok\n" : "reproduction: FAILED\n");
            return rep.pass() ? 0 : 1;
        }

        if (*es) {
            const LoadedMap lm = load_map(es_map);
            const Hole hole = parse_hole(es_hole);
            const EscapeEstimate est = estimate_escape(lm.map, UlamPartition(es_bins), hole);
            RunManifest man = manifest_for("escape", &lm);
            man.parameters["bins"] = std::to_string(es_bins);
            man.parameters["hole"] = hole.describe();
            man.timings.push_back({"escape", seconds_since(t_start)});
            json doc = {{"escape", to_json(est, es_density)}};
            std::cout << "hole " << hole.describe() << ", lambda(H) = " << g12(to_double(hole.measure())) << "\n"
                      << "bins " << es_bins << "\n"
                      << "e_H " << g12(est.e_H) << (est.total_escape ? " (total escape)" : "") << "\n"
                      << "escape rate " << (est.total_escape ? std::string("inf") : g12(est.escape_rate)) << "\n"
                      << "residual " << g12(est.solver_residual) << "\n";
            if (!es_cert.empty()) {
                std::ifstream in(es_cert);
                if (!in) throw Error(ErrorCode::kIo, "cannot open certificate '" + es_cert + "'");
                const json cert = json::parse(in);
                CertificationReport rep;
                rep.status = cert.at("status") == "certified" ? CertificationStatus::kCertified
                                                              : CertificationStatus::kFailed;
                if (rep.certified()) {
                    rep.delta_com = parse_rational(cert.at("delta_com").get<std::string>());
                    rep.hole_bound = parse_rational(cert.at("hole_bound").get<std::string>());
                    rep.theorem2_coefficient = cert.at("theorem2_coefficient").get<double>();
                    const CertificateBounds b = certificate_bounds(rep, hole.measure());
                    doc["certificate_bounds"] = to_json(b);
                    std::cout << "certificate: accim " << (b.accim_exists ? "guaranteed" : "not covered")
                              << ", 1 - e_H <= " << g12(b.one_minus_eH_upper) << "\n";
                }
            }
            doc["manifest"] = to_json(man);
            if (!es_out.empty()) emit(doc, es_out);
            return 0;
        }

        if (*ha) {
            const LoadedMap lm = load_map(ha_map);
            const AsymptoticRatioExperiment ex =
                asymptotic_ratio(lm.map, parse_rational(ha_point), parse_list(ha_widths), ha_k);
            RunManifest man = manifest_for("hole-asymptotics", &lm);
            man.parameters["point"] = format_rational(ex.y);
            man.parameters["widths"] = ha_widths;
            man.parameters["bins_per_hole"] = std::to_string(ha_k);
            man.timings.push_back({"experiment", seconds_since(t_start)});
            json doc = to_json(ex);
            doc["manifest"] = to_json(man);
            std::printf("%-12s %-10s %-20s %-20s %s\n", "width", "bins", "e_H", "escape rate", "(1-e_H)/lambda(H)");
            for (const auto& h : ex.holes) {
                std::printf("%-12s %-10lld %-20.15f %-20.12g %.8f\n", format_rational(h.width).c_str(),
                            static_cast<long long>(h.n_bins), h.e_H, h.escape_rate, h.ratio);
            }
            std::printf("orbit: %s", ex.orbit.periodic ? "periodic" : "non-periodic");
            if (ex.orbit.periodic) std::printf(" (period %d, derivative %g)", ex.orbit.period, ex.orbit.derivative);
            if (ex.orbit.ambiguous) std::printf(" [ambiguous: %s]", ex.orbit.note.c_str());
            std::printf("\nextrapolated limit %.8f%s, predicted %.8f (%s density)\n", ex.extrapolated_limit,
                        ex.low_confidence ? " (low confidence)" : "", ex.predicted_limit,
                        ex.density_analytic ? "analytic" : "Ulam, advisory");
            if (!ha_out.empty()) emit(doc, ha_out);
            return 0;
        }

        if (*ca) {
            // inspect without a name lists every entry, like list.
            if (ca_action == "list" || (ca_action == "inspect" && ca_name.empty())) {
                const auto entries = cache.list();
                if (entries.empty()) std::cout << "cache " << cache.directory() << " is empty\n";
                for (const auto& e : entries) std::cout << e.kind << "\t" << e.bytes << "\t" << e.name << "\n";
            } else if (ca_action == "purge") {
                std::cout << "removed " << cache.purge() << " entries from " << cache.directory() << "\n";
            } else {
                std::cout << cache.inspect(ca_name);
            }
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
