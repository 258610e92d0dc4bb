#pragma once

#include "ulamcert/certify.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace ulamcert {

/// One compared cell of a reference table.
struct TableCell {
    std::string table;
    std::string column;
    std::string quantity;
    std::string expected;
    std::string actual;
    /// "exact", or the relative tolerance.
    std::string tolerance;
    double relative_error = 0.0;
    bool pass = false;
};

struct TableReproduction {
    CertificationReport table1;
    CertificationReport table2;
    std::vector<TableCell> cells;
    bool pass() const;
};

/// Runs the certification for ell = 1/25 and ell = 1/40 on the bundled
/// ten-branch map and compares every tabulated cell.
TableReproduction reproduce_tables(const PiecewiseMap& map, const CertificationConfig& base);

/// Compares the certification logs against the reference tables.
std::vector<TableCell> compare_tables(const CertificationReport& table1, const CertificationReport& table2);

nlohmann::json to_json(const TableCell& cell);
std::string cells_table(const std::vector<TableCell>& cells);

}  // namespace ulamcert
