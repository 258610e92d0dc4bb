#include "ulamcert/cache.hpp"

#include "ulamcert/error.hpp"
#include "ulamcert/report.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace ulamcert {

namespace fs = std::filesystem;

namespace {

std::string sanitize(const Rational& q) {
    std::string s = format_rational(q);
    std::replace(s.begin(), s.end(), '/', 'd');
    std::replace(s.begin(), s.end(), '-', 'm');
    return s;
}

}  // namespace

std::string Cache::default_directory() {
    if (const char* env = std::getenv("ULAMCERT_CACHE_DIR"); env && *env) return env;
    return ".ulamcert-cache";
}

Cache::Cache(std::string directory) : dir_(std::move(directory)) {}

std::string Cache::path_of(const std::string& key) const { return (fs::path(dir_) / key).string(); }

std::string Cache::matrix_key(const std::string& fingerprint, std::int64_t n_bins,
                              const std::optional<Hole>& hole) const {
    std::string key = "matrix-" + fingerprint + "-n" + std::to_string(n_bins);
    if (hole) {
        key += "-open-" + sanitize(hole->a) + "_" + sanitize(hole->b);
    } else {
        key += "-closed";
    }
    return key + ".txt";
}

std::string Cache::spectral_key(const std::string& fingerprint, std::int64_t n_bins, PowerNormConvention convention,
                                int truncation_N) const {
    return "spectral-" + fingerprint + "-n" + std::to_string(n_bins) + "-" + to_string(convention) + "-N" +
           std::to_string(truncation_N) + ".json";
}

std::optional<UlamMatrix> Cache::load_matrix(const std::string& fingerprint, std::int64_t n_bins,
                                             const std::optional<Hole>& hole) const {
    const std::string path = path_of(matrix_key(fingerprint, n_bins, hole));
    if (!fs::exists(path)) return std::nullopt;
    try {
        return ulamcert::load_matrix(path, fingerprint);
    } catch (const Error&) {
        return std::nullopt;  // unreadable entries are treated as misses
    }
}

void Cache::store_matrix(const UlamMatrix& matrix) const {
    fs::create_directories(dir_);
    const std::string path = path_of(matrix_key(matrix.map_fingerprint, matrix.size(), matrix.hole));
    const std::string tmp = path + ".tmp." + std::to_string(::getpid());
    save_matrix(matrix, tmp);
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw Error(ErrorCode::kIo, "cannot rename into '" + path + "': " + ec.message());
    }
}

std::optional<SpectralData> Cache::load_spectral(const std::string& fingerprint, std::int64_t n_bins, double r,
                                                 PowerNormConvention convention, int truncation_N) const {
    const std::string path = path_of(spectral_key(fingerprint, n_bins, convention, truncation_N));
    std::ifstream in(path);
    if (!in) return std::nullopt;
    try {
        const nlohmann::json doc = nlohmann::json::parse(in);
        SpectralData data = spectral_from_json(doc);
        if (data.r > r || data.n_bins != n_bins) return std::nullopt;
        return data;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

void Cache::store_spectral(const std::string& fingerprint, const SpectralData& data, int requested_N) const {
    const std::string path = path_of(spectral_key(fingerprint, data.n_bins, data.convention, requested_N));
    write_file_atomic(path, to_json(data, true).dump() + "\n");
}

std::vector<CacheEntry> Cache::list() const {
    std::vector<CacheEntry> out;
    if (!fs::exists(dir_)) return out;
    for (const auto& entry : fs::directory_iterator(dir_)) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        if (name.find(".tmp.") != std::string::npos) continue;
        std::string kind;
        if (name.rfind("matrix-", 0) == 0) kind = "matrix";
        else if (name.rfind("spectral-", 0) == 0) kind = "spectral";
        else continue;
        out.push_back({name, kind, entry.file_size()});
    }
    std::sort(out.begin(), out.end(), [](const CacheEntry& a, const CacheEntry& b) { return a.name < b.name; });
    return out;
}

std::size_t Cache::purge() const {
    std::size_t removed = 0;
    if (!fs::exists(dir_)) return 0;
    for (const auto& entry : fs::directory_iterator(dir_)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("matrix-", 0) == 0 || name.rfind("spectral-", 0) == 0) {
            fs::remove(entry.path());
            ++removed;
        }
    }
    return removed;
}

std::string Cache::inspect(const std::string& name) const {
    const std::string path = path_of(name);
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::kIo, "no cache entry '" + name + "'");
    std::ostringstream os;
    if (name.rfind("matrix-", 0) == 0) {
        std::string line;
        for (int i = 0; i < 5 && std::getline(in, line); ++i) os << line << "\n";
        return os.str();
    }
    const nlohmann::json doc = nlohmann::json::parse(in);
    nlohmann::json summary = doc;
    summary.erase("invariant_density");
    return summary.dump(2) + "\n";
}

SpectrumProvider cached_spectrum_provider(const PiecewiseMap& map, const SpectralOptions& options, const Cache& cache,
                                          std::vector<std::string>* hits) {
    return [&map, options, &cache, hits](std::int64_t n, double r) -> ProvidedSpectrum {
        if (auto data = cache.load_spectral(map.fingerprint(), n, r, options.convention, options.truncation_N)) {
            if (hits) hits->push_back("spectral n=" + std::to_string(n));
            return {std::move(*data), "cache"};
        }
        std::optional<UlamMatrix> matrix = cache.load_matrix(map.fingerprint(), n);
        if (matrix) {
            if (hits) hits->push_back("matrix n=" + std::to_string(n));
        } else {
            matrix = build_closed(map, UlamPartition(n));
            cache.store_matrix(*matrix);
        }
        SpectralData data = eigen_analysis(*matrix, r, options);
        cache.store_spectral(map.fingerprint(), data, options.truncation_N);
        return {std::move(data), "computed"};
    };
}

}  // namespace ulamcert
