#include "ulamcert/reproduce.hpp"

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>

namespace ulamcert {

namespace {

// Reference values of the two tables for the ten-branch map.
constexpr double kT1Neumann = 7.444310493;
constexpr double kT1HStar = 45.46070939;
constexpr double kT1Scaled = 0.0002319492040;
constexpr double kT2HStar = 63.73181657;
constexpr double kT2Scaled = 0.0001763820641;
constexpr double kT2ClosedCheck = 0.0002425063815;
constexpr double kT2Transferred = 1036.693385;
constexpr double kT2FineScaled = 0.00001216687545;

// Tolerances: values downstream of the computed H* absorb eigensolver and
// rounding differences (1e-3, the fitted H* at r = 39/40 1e-2); values
// downstream of the transferred bound inherit its 0.10.
constexpr double kChainTol = 1e-3;
constexpr double kHStar2Tol = 1e-2;
constexpr double kTransferTol = 0.10;

std::string g(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

struct Collector {
    std::vector<TableCell>& cells;
    std::string table;
    std::string column;

    void exact(const std::string& quantity, const std::string& expected, const std::string& actual) {
        cells.push_back({table, column, quantity, expected, actual, "exact", 0.0, expected == actual});
    }
    void relative(const std::string& quantity, double expected, double actual, double tol) {
        const double err = std::abs(actual - expected) / std::abs(expected);
        char tbuf[32];
        std::snprintf(tbuf, sizeof tbuf, "%g", tol);
        cells.push_back({table, column, quantity, g(expected), g(actual), tbuf, err, err <= tol});
    }
    void missing(const std::string& quantity, const std::string& expected) {
        cells.push_back({table, column, quantity, expected, "<missing>", "-", 0.0, false});
    }
};

const IterationRecord* find_iteration(const CertificationReport& rep, std::int64_t n_bins) {
    for (const auto& rec : rep.iterations) {
        if (rec.n_bins == n_bins) return &rec;
    }
    return nullptr;
}

}  // namespace

bool TableReproduction::pass() const {
    for (const auto& c : cells) {
        if (!c.pass) return false;
    }
    return !cells.empty();
}

std::vector<TableCell> compare_tables(const CertificationReport& t1, const CertificationReport& t2) {
    std::vector<TableCell> cells;
    {
        Collector c{cells, "table1", "Loop I"};
        c.exact("status", "certified", t1.certified() ? "certified" : "failed");
        c.exact("r", "24/25", format_rational(t1.r));
        const IterationRecord* rec = find_iteration(t1, 5000);
        if (!rec || !rec->resolvent) {
            c.missing("iteration at mesh 1/5000", "present");
        } else {
            c.exact("delta", "1/26", format_rational(rec->delta));
            c.exact("epsilon", "1/5000", format_rational(rec->mesh));
            c.exact("n1", "1", std::to_string(rec->kl.n1));
            Rational C = 1;
            for (int i = 0; i < rec->kl.n1; ++i) C /= t1.r;
            c.exact("C", "25/24", format_rational(C));
            c.exact("n2", "8", std::to_string(rec->kl.n2));
            c.relative("neumann bound", kT1Neumann, rec->resolvent->neumann_bound, kChainTol);
            c.relative("H*", kT1HStar, rec->H, kChainTol);
            c.relative("(2 Gamma)^-1 eps0*", kT1Scaled, rec->kl.scaled_epsilon0, kChainTol);
            c.exact("step 7", "pass", rec->step7_pass ? "pass" : "fail");
        }
        c.column = "Output";
        c.exact("epsilon_com", "1/5000", t1.certified() ? format_rational(t1.epsilon_com) : "-");
        c.exact("delta_com", "1/26", t1.certified() ? format_rational(t1.delta_com) : "-");
        c.exact("hole bound", "1/4500", t1.certified() ? format_rational(t1.hole_bound) : "-");
    }
    {
        Collector c{cells, "table2", "Loop I"};
        c.exact("status", "certified", t2.certified() ? "certified" : "failed");
        c.exact("r", "39/40", format_rational(t2.r));
        const IterationRecord* coarse = find_iteration(t2, 5000);
        if (!coarse || !coarse->resolvent) {
            c.missing("iteration at mesh 1/5000", "present");
        } else {
            c.exact("delta", "1/41", format_rational(coarse->delta));
            c.exact("epsilon", "1/5000", format_rational(coarse->mesh));
            c.exact("n1", "1", std::to_string(coarse->kl.n1));
            c.exact("n2", "8", std::to_string(coarse->kl.n2));
            c.relative("H*", kT2HStar, coarse->H, kHStar2Tol);
            c.relative("(2 Gamma)^-1 eps0*", kT2Scaled, coarse->kl.scaled_epsilon0, kChainTol);
            c.exact("step 7", "fail", coarse->step7_pass ? "pass" : "fail");
            const bool boot = coarse->plan && coarse->plan->bootstrap_used && coarse->plan->bootstrap;
            c.exact("bootstrap", "used", boot ? "used" : "not used");
            if (boot) {
                c.relative("closed-only (2 Gamma)^-1 eps0*", kT2ClosedCheck, coarse->plan->bootstrap->check_value,
                           kChainTol);
                c.relative("transferred bound", kT2Transferred, coarse->plan->bootstrap->transferred_bound,
                           kTransferTol);
            }
        }
        c.column = "Loop II";
        const IterationRecord* fine = find_iteration(t2, 100000);
        if (!fine) {
            c.missing("iteration at mesh 1/100000", "present");
        } else {
            c.exact("epsilon", "1/100000", format_rational(fine->mesh));
            c.exact("H source", "transferred", fine->h_source);
            c.exact("n2", "11", std::to_string(fine->kl.n2));
            c.relative("(2 Gamma)^-1 eps0", kT2FineScaled, fine->kl.scaled_epsilon0, kTransferTol);
            c.exact("step 7", "pass", fine->step7_pass ? "pass" : "fail");
        }
        c.column = "Output";
        c.exact("epsilon_com", "1/100000", t2.certified() ? format_rational(t2.epsilon_com) : "-");
        c.exact("delta_com", "1/41", t2.certified() ? format_rational(t2.delta_com) : "-");
        c.exact("hole bound", "1/90000", t2.certified() ? format_rational(t2.hole_bound) : "-");
    }
    return cells;
}

TableReproduction reproduce_tables(const PiecewiseMap& map, const CertificationConfig& base) {
    TableReproduction out;
    CertificationConfig c1 = base;
    c1.ell = Rational(1, 25);
    out.table1 = run_certification(map, c1);
    CertificationConfig c2 = base;
    c2.ell = Rational(1, 40);
    out.table2 = run_certification(map, c2);
    out.cells = compare_tables(out.table1, out.table2);
    return out;
}

nlohmann::json to_json(const TableCell& cell) {
    return {{"table", cell.table},         {"column", cell.column},     {"quantity", cell.quantity},
            {"expected", cell.expected},   {"actual", cell.actual},     {"tolerance", cell.tolerance},
            {"relative_error", cell.relative_error}, {"pass", cell.pass}};
}

std::string cells_table(const std::vector<TableCell>& cells) {
    std::ostringstream os;
    os << std::left << std::setw(8) << "table" << std::setw(9) << "column" << std::setw(32) << "quantity"
       << std::setw(18) << "expected" << std::setw(18) << "actual" << std::setw(8) << "tol" << std::setw(12)
       << "rel.err" << "result\n";
    for (const auto& c : cells) {
        char err[32];
        std::snprintf(err, sizeof err, "%.3g", c.relative_error);
        os << std::left << std::setw(8) << c.table << std::setw(9) << c.column << std::setw(32) << c.quantity
           << std::setw(18) << c.expected << std::setw(18) << c.actual << std::setw(8) << c.tolerance << std::setw(12)
           << (c.tolerance == "exact" ? "-" : err) << (c.pass ? "ok" : "FAILED") << "\n";
    }
    return os.str();
}

}  // namespace ulamcert
