#include "ulamcert/map_config.hpp"

#include "ulamcert/error.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>

namespace ulamcert {

using nlohmann::json;

Rational rational_from_json(const json& value, const std::string& field) {
    if (value.is_string()) return parse_rational(value.get<std::string>());
    if (value.is_number_integer()) return Rational(value.get<long long>());
    if (value.is_number()) {
        // Shortest round-trip text of the double, so 0.1 means 1/10.
        return parse_rational(value.dump());
    }
    throw Error(ErrorCode::kParse, "field '" + field + "' must be a rational string or a number");
}

namespace {

const json& require(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) throw Error(ErrorCode::kParse, where + ": missing field '" + key + "'");
    return *it;
}

std::vector<double> double_array(const json& value, const std::string& where) {
    if (!value.is_array()) throw Error(ErrorCode::kParse, where + " must be an array");
    std::vector<double> out;
    out.reserve(value.size());
    for (const auto& v : value) out.push_back(to_double(rational_from_json(v, where)));
    return out;
}

Branch branch_from_json(const json& b, std::size_t index) {
    const std::string where = "branch " + std::to_string(index);
    if (!b.is_object()) throw Error(ErrorCode::kParse, where + " must be an object");
    const json& dom = require(b, "domain", where);
    if (!dom.is_array() || dom.size() != 2) throw Error(ErrorCode::kParse, where + ": domain must be [lo, hi]");
    const Rational lo = rational_from_json(dom[0], where + ".domain");
    const Rational hi = rational_from_json(dom[1], where + ".domain");
    const std::string kind = require(b, "kind", where).get<std::string>();
    if (kind == "linear") {
        return Branch::linear(lo, hi, rational_from_json(require(b, "slope", where), where + ".slope"),
                              rational_from_json(require(b, "intercept", where), where + ".intercept"));
    }
    if (kind == "moebius") {
        return Branch::moebius(lo, hi, rational_from_json(require(b, "p", where), where + ".p"),
                               rational_from_json(require(b, "q", where), where + ".q"),
                               rational_from_json(require(b, "r", where), where + ".r"),
                               rational_from_json(require(b, "s", where), where + ".s"));
    }
    if (kind == "tabulated") {
        return Branch::tabulated(lo, hi, double_array(require(b, "x", where), where + ".x"),
                                 double_array(require(b, "y", where), where + ".y"));
    }
    throw Error(ErrorCode::kParse, where + ": unknown kind '" + kind + "'");
}

}  // namespace

PiecewiseMap map_from_json(const json& doc, ValidationOptions options) {
    if (!doc.is_object()) throw Error(ErrorCode::kParse, "map config must be a JSON object");
    const json& branches_json = require(doc, "branches", "map config");
    if (!branches_json.is_array()) throw Error(ErrorCode::kParse, "'branches' must be an array");
    std::vector<Branch> branches;
    for (std::size_t i = 0; i < branches_json.size(); ++i) branches.push_back(branch_from_json(branches_json[i], i));

    const bool has_alpha = doc.contains("alpha0");
    const bool has_b0 = doc.contains("B0");
    Rational alpha0;
    Rational b0;
    if (has_alpha && has_b0) {
        alpha0 = rational_from_json(doc["alpha0"], "alpha0");
        b0 = rational_from_json(doc["B0"], "B0");
    } else if (!has_alpha && !has_b0) {
        const LyInputs defaults = markov_linear_constants(branches);
        alpha0 = defaults.alpha0;
        b0 = defaults.B0;
    } else {
        throw Error(ErrorCode::kParse, "alpha0 and B0 must be given together");
    }
    if (doc.contains("require_expansion")) options.require_expansion = doc["require_expansion"].get<bool>();
    const std::string label = doc.value("label", std::string("unnamed"));
    return PiecewiseMap(std::move(branches), alpha0, b0, label, options);
}

LoadedMap load_map(const std::string& path, ValidationOptions options) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::kIo, "cannot open map config '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::kParse, "map config '" + path + "': " + e.what());
    }
    try {
        return {map_from_json(doc, options), path, fingerprint_of(text)};
    } catch (const json::exception& e) {
        throw Error(ErrorCode::kParse, "map config '" + path + "': " + e.what());
    }
}

}  // namespace ulamcert
