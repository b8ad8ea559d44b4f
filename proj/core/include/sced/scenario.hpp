#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "sced/numerics.hpp"

namespace sced {

/// SplitMix64 sequence; the single PRNG behind every seeded operation so
/// results are reproducible bit-for-bit from the seed alone.
struct SplitMix64 {
    std::uint64_t state = 0;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        state += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) from the top 53 bits.
    double next_unit() { return double(next() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller; consumes two uniforms per draw
    /// (the sine half of the pair is discarded to keep the stream layout
    /// independent of call patterns).
    double next_gaussian();

    /// Derive an independent stream, e.g. one per repetition.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
        SplitMix64 g(seed ^ (0xA0761D6478BD642FULL * (stream + 1)));
        return g.next();
    }
};

/// A set of N i.i.d. forecast-error vectors plus provenance. `dim` is the
/// number of wind farms (absolute MW errors) or of regional factors
/// (relative errors, `relative = true`).
struct ScenarioSet {
    std::size_t dim = 0;
    std::vector<Vec> scenarios;
    bool relative = false;
    std::string provenance;
    std::vector<int> region_ids;  // optional, one per dimension

    std::size_t size() const { return scenarios.size(); }
    const Vec& operator[](std::size_t i) const { return scenarios[i]; }

    /// Subset by index (order preserved); provenance is carried over.
    ScenarioSet select(const std::vector<std::size_t>& indices) const;
};

/// Affine map w = matrix * t + offset from regional factor space onto farm
/// space. Full column rank is required when the map is used to justify
/// hull-vertex transport; check_rank() enforces it via pivoted LU.
struct AffineMap {
    DenseMatrix matrix;  // n_w x m
    Vec offset;          // n_w

    static AffineMap identity(std::size_t n);

    std::size_t domain_dim() const { return matrix.cols; }
    std::size_t range_dim() const { return matrix.rows; }
    Vec apply(const Vec& t) const;
    /// Throws ValidationError when the matrix has deficient column rank
    /// (tolerance 1e-10 relative).
    void check_rank() const;
};

/// Map with one column per region scaled by each farm's forecast, realizing
/// perfectly correlated relative errors inside a region.
AffineMap make_regional_map(const Vec& farm_forecast_mw,
                            const std::vector<std::size_t>& farm_region_index,
                            std::size_t num_regions);

/// N i.i.d. draws from the zero-mean diagonal Gaussian over regional
/// relative-error factors. Deterministic in the seed. Throws InvalidSigma.
ScenarioSet sample_gaussian_regions(const Vec& region_sigmas, std::size_t n,
                                    std::uint64_t seed);

/// Companion sampler for distribution-free checks: independent uniforms on
/// [-half_width_q, +half_width_q] per region.
ScenarioSet sample_uniform_regions(const Vec& region_half_widths, std::size_t n,
                                   std::uint64_t seed);

/// Apply an affine map to every scenario (factor space -> farm space).
ScenarioSet project_to_farms(const ScenarioSet& factors, const AffineMap& map);

/// Load scenarios from CSV: one row per scenario, `dim` numeric columns.
/// A leading `# relative` comment marks relative (p.u.) values.
ScenarioSet load_scenarios_csv(const std::filesystem::path& path, std::size_t dim);

/// Disjoint seeded-shuffle partition into (train, holdout) of sizes
/// (n_train, N - n_train). Throws InvalidSplit.
std::pair<ScenarioSet, ScenarioSet> split_holdout(const ScenarioSet& s,
                                                  std::size_t n_train,
                                                  std::uint64_t seed);

}  // namespace sced
