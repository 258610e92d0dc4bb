#pragma once

#include "ulamcert/certify.hpp"
#include "ulamcert/spectral.hpp"
#include "ulamcert/ulam.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ulamcert {

struct CacheEntry {
    std::string name;
    /// "matrix" or "spectral".
    std::string kind;
    std::uintmax_t bytes = 0;
};

/// On-disk store of Ulam matrices and spectral data keyed by map
/// fingerprint, bin count, mode/hole and (for spectra) norm convention and
/// truncation. Writes go through a temporary file and an atomic rename.
class Cache {
public:
    /// ULAMCERT_CACHE_DIR when set, otherwise ./.ulamcert-cache.
    static std::string default_directory();

    explicit Cache(std::string directory = default_directory());
    const std::string& directory() const { return dir_; }

    std::string matrix_key(const std::string& fingerprint, std::int64_t n_bins,
                           const std::optional<Hole>& hole = std::nullopt) const;
    std::string spectral_key(const std::string& fingerprint, std::int64_t n_bins, PowerNormConvention convention,
                             int truncation_N) const;

    std::optional<UlamMatrix> load_matrix(const std::string& fingerprint, std::int64_t n_bins,
                                          const std::optional<Hole>& hole = std::nullopt) const;
    void store_matrix(const UlamMatrix& matrix) const;

    /// Cached data computed at level r_cached <= r is valid at r.
    std::optional<SpectralData> load_spectral(const std::string& fingerprint, std::int64_t n_bins, double r,
                                              PowerNormConvention convention, int truncation_N) const;
    void store_spectral(const std::string& fingerprint, const SpectralData& data, int requested_N) const;

    std::vector<CacheEntry> list() const;
    std::size_t purge() const;
    /// Summary text of one entry (matrix header or spectral fields).
    std::string inspect(const std::string& name) const;

private:
    std::string path_of(const std::string& key) const;
    std::string dir_;
};

/// Spectrum provider for run_certification backed by the cache. Each hit is
/// appended to hits as a short description.
SpectrumProvider cached_spectrum_provider(const PiecewiseMap& map, const SpectralOptions& options, const Cache& cache,
                                          std::vector<std::string>* hits);

}  // namespace ulamcert
