#pragma once

#include "ulamcert/certify.hpp"
#include "ulamcert/escape.hpp"
#include "ulamcert/kl.hpp"
#include "ulamcert/spectral.hpp"

#include "json.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace ulamcert {

inline constexpr const char* kToolVersion = "1.0.0";

/// Provenance block embedded in every report.
struct RunManifest {
    std::string subcommand;
    std::string map_path;
    std::string map_hash;
    std::string map_fingerprint;
    /// Numeric inputs, rationals kept in p/q form.
    std::map<std::string, std::string> parameters;
    std::vector<std::pair<std::string, double>> timings;
    std::vector<std::string> cache_hits;
};

nlohmann::json to_json(const RunManifest& manifest, bool include_timings = true);

nlohmann::json to_json(const LYConstants& ly);
nlohmann::json to_json(const KLConstants& kl);
nlohmann::json to_json(const ResolventBound& bound);
nlohmann::json to_json(const SpectralData& data, bool include_density = true);
SpectralData spectral_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const SeparationResult& sep);
nlohmann::json to_json(const IterationRecord& rec);
nlohmann::json to_json(const CertificationReport& report);
nlohmann::json to_json(const CertificateBounds& bounds);
nlohmann::json to_json(const EscapeEstimate& est, bool include_density = false);
nlohmann::json to_json(const OrbitClass& orbit);
nlohmann::json to_json(const AsymptoticRatioExperiment& ex);

/// Text table of the certification log, one column per iteration.
std::string certification_table(const CertificationReport& report);

/// Writes text to path via a temporary file and rename.
void write_file_atomic(const std::string& path, const std::string& text);

}  // namespace ulamcert
