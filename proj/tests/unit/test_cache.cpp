#include "test_support.hpp"

#include "ulamcert/cache.hpp"
#include "ulamcert/certify.hpp"
#include "ulamcert/error.hpp"
#include "ulamcert/report.hpp"

#include "doctest.h"

#include <filesystem>

using namespace ulamcert;
using namespace testsupport;

namespace {

// Report plus manifest, serialized without timings.
std::string certify_json(const PiecewiseMap& map, const Cache& cache) {
    CertificationConfig cfg;
    cfg.ell = Rational(1, 25);
    cfg.bins_init = 100;
    RunManifest manifest;
    manifest.subcommand = "certify";
    manifest.map_fingerprint = map.fingerprint();
    manifest.parameters["ell"] = "1/25";
    cfg.provider = cached_spectrum_provider(map, cfg.spectral, cache, &manifest.cache_hits);
    const CertificationReport rep = run_certification(map, cfg);
    manifest.timings.push_back({"certify", 1.0});
    nlohmann::json doc = to_json(rep);
    doc["manifest"] = to_json(manifest, false);
    return doc.dump(2);
}

}  // namespace

TEST_SUITE("cache") {
    TEST_CASE("empty cache lists nothing") {
        const Cache cache(temp_dir("cache-empty"));
        CHECK(cache.list().empty());
        CHECK(cache.purge() == 0);
        CHECK_THROWS_AS(cache.inspect("missing.json"), Error);
    }

    TEST_CASE("matrices round trip and keys separate modes and holes") {
        const Cache cache(temp_dir("cache-matrix"));
        const PiecewiseMap map = ten_branch_map();
        const Hole hole(Rational(1, 2), Rational(51, 100));
        CHECK_FALSE(cache.load_matrix(map.fingerprint(), 100).has_value());
        cache.store_matrix(build_closed(map, UlamPartition(100)));
        cache.store_matrix(build_open(map, UlamPartition(100), hole));
        CHECK(cache.matrix_key(map.fingerprint(), 100) != cache.matrix_key(map.fingerprint(), 100, hole));
        CHECK(cache.matrix_key(map.fingerprint(), 100) != cache.matrix_key(map.fingerprint(), 200));
        const auto closed = cache.load_matrix(map.fingerprint(), 100);
        const auto open = cache.load_matrix(map.fingerprint(), 100, hole);
        REQUIRE(closed.has_value());
        REQUIRE(open.has_value());
        CHECK(closed->mode == MatrixMode::kClosed);
        CHECK(open->mode == MatrixMode::kOpen);
        CHECK(cache.list().size() == 2);
        CHECK(cache.inspect(cache.list().front().name).find("ulam-matrix") != std::string::npos);
    }

    TEST_CASE("spectral data is reusable for any larger r") {
        const Cache cache(temp_dir("cache-spectral"));
        const PiecewiseMap map = ten_branch_map();
        const SpectralData d = eigen_analysis(build_closed(map, UlamPartition(60)), 0.96);
        cache.store_spectral(map.fingerprint(), d, 5);
        const auto later = cache.load_spectral(map.fingerprint(), 60, 0.975, PowerNormConvention::kColumnSum, 5);
        REQUIRE(later.has_value());
        CHECK(later->q_power_norms == d.q_power_norms);
        CHECK(later->invariant_density == d.invariant_density);
        CHECK_FALSE(cache.load_spectral(map.fingerprint(), 60, 0.5, PowerNormConvention::kColumnSum, 5).has_value());
        CHECK_FALSE(cache.load_spectral(map.fingerprint(), 60, 0.975, PowerNormConvention::kRowSum, 5).has_value());
    }

    TEST_CASE("provider hits the cache on the second run and misses after a purge") {
        const Cache cache(temp_dir("cache-provider"));
        const PiecewiseMap map = tenfold_map();
        std::vector<std::string> hits;
        const SpectrumProvider p = cached_spectrum_provider(map, SpectralOptions{}, cache, &hits);
        CHECK(p(100, 0.96).source == "computed");
        CHECK(hits.empty());
        CHECK(p(100, 0.975).source == "cache");
        CHECK(hits.size() == 1);
        CHECK(cache.purge() >= 2);
        CHECK(p(100, 0.96).source == "computed");
    }

    TEST_CASE("property: identical manifests and caches give byte-identical reports") {
        const PiecewiseMap map = tenfold_map();
        const Cache warm(temp_dir("cache-determinism"));
        const std::string cold = certify_json(map, warm);
        const std::string first = certify_json(map, warm);
        const std::string second = certify_json(map, warm);
        CHECK(first == second);
        CHECK(cold != first);  // cache hits are recorded in the manifest
        const Cache other(temp_dir("cache-determinism-2"));
        CHECK(certify_json(map, other) == cold);
        CHECK(first.find("\"timings\"") == std::string::npos);
    }
}

TEST_SUITE("report") {
    TEST_CASE("spectral JSON round trips exactly") {
        const SpectralData d = eigen_analysis(build_closed(ten_branch_map(), UlamPartition(60)), 0.96);
        const SpectralData back = spectral_from_json(nlohmann::json::parse(to_json(d).dump()));
        CHECK(back.q_power_norms == d.q_power_norms);
        CHECK(back.invariant_density == d.invariant_density);
        CHECK(back.r == d.r);
        CHECK(back.eigenvalues_above_r == d.eigenvalues_above_r);
        CHECK(back.convention == d.convention);
    }

    TEST_CASE("certification reports keep rationals exact") {
        CertificationConfig cfg;
        cfg.ell = Rational(1, 25);
        cfg.bins_init = 100;
        const CertificationReport rep = run_certification(tenfold_map(), cfg);
        const nlohmann::json j = to_json(rep);
        CHECK(j["delta_com"] == "1/26");
        CHECK(j["ell"] == "1/25");
        CHECK(j["status"] == "certified");
        const std::string table = certification_table(rep);
        CHECK(table.find("1/26") != std::string::npos);
        CHECK(table.find("certified") != std::string::npos);
    }

    TEST_CASE("atomic writes leave no temporary files") {
        const std::string dir = temp_dir("report-atomic");
        write_file_atomic(dir + "/a.json", "{}\n");
        write_file_atomic(dir + "/a.json", "{\"x\": 1}\n");
        int files = 0;
        for (const auto& e : std::filesystem::directory_iterator(dir)) {
            (void)e;
            ++files;
        }
        CHECK(files == 1);
    }
}
