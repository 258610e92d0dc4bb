#pragma once

#include "ulamcert/maps.hpp"

#include "json.hpp"

#include <string>

namespace ulamcert {

/// Loaded map plus the source text hash, so reports can name the exact config.
struct LoadedMap {
    PiecewiseMap map;
    std::string path;
    std::string config_hash;
};

/// JSON layout:
///   {"label": "...", "alpha0": "1/9", "B0": "2/9",
///    "branches": [{"domain": ["0", "1/10"], "kind": "moebius", "p": 9, "q": 0, "r": -1, "s": 1},
///                 {"domain": ["1/10", "2/10"], "kind": "linear", "slope": 10, "intercept": -1},
///                 {"domain": [..], "kind": "tabulated", "x": [...], "y": [...]}]}
/// Rationals may be strings ("p/q", "0.1") or JSON numbers. When alpha0 and B0
/// are both omitted the defaults for onto piecewise-linear maps are used.
PiecewiseMap map_from_json(const nlohmann::json& doc, ValidationOptions options = {});
LoadedMap load_map(const std::string& path, ValidationOptions options = {});

/// Accepts a JSON string or number and converts it exactly.
Rational rational_from_json(const nlohmann::json& value, const std::string& field);

}  // namespace ulamcert
