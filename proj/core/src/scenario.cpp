#include "sced/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace sced {

double SplitMix64::next_gaussian() {
    // u1 in (0,1] so the log is finite
    const double u1 = 1.0 - next_unit();
    const double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

ScenarioSet ScenarioSet::select(const std::vector<std::size_t>& indices) const {
    ScenarioSet out;
    out.dim = dim;
    out.relative = relative;
    out.provenance = provenance + " (subset of " + std::to_string(size()) + ")";
    out.region_ids = region_ids;
    out.scenarios.reserve(indices.size());
    for (std::size_t i : indices) out.scenarios.push_back(scenarios.at(i));
    return out;
}

AffineMap AffineMap::identity(std::size_t n) {
    return {DenseMatrix::identity(n), Vec(n, 0.0)};
}

Vec AffineMap::apply(const Vec& t) const {
    if (t.size() != matrix.cols) throw DimensionMismatch("AffineMap::apply size");
    Vec w = matrix.apply(t);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] += offset[i];
    return w;
}

void AffineMap::check_rank() const {
    // Column rank via LU on M^T M with a relative pivot tolerance.
    const DenseMatrix mt = matrix.transposed();
    DenseMatrix gram = mt.matmul(matrix);
    const double scale = std::max(gram.inf_norm(), 1e-300);
    const std::size_t m = gram.rows;
    // Gaussian elimination with partial pivoting, rank counting.
    std::size_t rank = 0;
    for (std::size_t k = 0; k < m; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < m; ++i)
            if (std::abs(gram(i, k)) > std::abs(gram(p, k))) p = i;
        if (std::abs(gram(p, k)) < 1e-10 * scale) continue;
        if (p != k)
            for (std::size_t j = 0; j < m; ++j) std::swap(gram(k, j), gram(p, j));
        ++rank;
        for (std::size_t i = k + 1; i < m; ++i) {
            const double f = gram(i, k) / gram(k, k);
            for (std::size_t j = k; j < m; ++j) gram(i, j) -= f * gram(k, j);
        }
    }
    if (rank != matrix.cols)
        throw ValidationError("AffineMap: matrix does not have full column rank");
}

AffineMap make_regional_map(const Vec& farm_forecast_mw,
                            const std::vector<std::size_t>& farm_region_index,
                            std::size_t num_regions) {
    if (farm_forecast_mw.size() != farm_region_index.size())
        throw DimensionMismatch("make_regional_map: forecast/region size mismatch");
    AffineMap map;
    map.matrix = DenseMatrix(farm_forecast_mw.size(), num_regions);
    map.offset = Vec(farm_forecast_mw.size(), 0.0);
    for (std::size_t f = 0; f < farm_forecast_mw.size(); ++f) {
        if (farm_region_index[f] >= num_regions)
            throw DimensionMismatch("make_regional_map: region index out of range");
        map.matrix(f, farm_region_index[f]) = farm_forecast_mw[f];
    }
    return map;
}

ScenarioSet sample_gaussian_regions(const Vec& region_sigmas, std::size_t n,
                                    std::uint64_t seed) {
    for (double s : region_sigmas)
        if (!(s > 0.0) || !std::isfinite(s))
            throw InvalidSigma("sample_gaussian_regions: sigmas must be positive");
    if (n < 1) throw InvalidSigma("sample_gaussian_regions: need N >= 1");

    ScenarioSet out;
    out.dim = region_sigmas.size();
    out.relative = true;
    out.provenance = "gaussian(seed=" + std::to_string(seed) + ")";
    out.scenarios.reserve(n);
    SplitMix64 rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        Vec v(out.dim);
        for (std::size_t q = 0; q < out.dim; ++q)
            v[q] = region_sigmas[q] * rng.next_gaussian();
        out.scenarios.push_back(std::move(v));
    }
    return out;
}

ScenarioSet sample_uniform_regions(const Vec& region_half_widths, std::size_t n,
                                   std::uint64_t seed) {
    for (double s : region_half_widths)
        if (!(s > 0.0) || !std::isfinite(s))
            throw InvalidSigma("sample_uniform_regions: half widths must be positive");
    if (n < 1) throw InvalidSigma("sample_uniform_regions: need N >= 1");

    ScenarioSet out;
    out.dim = region_half_widths.size();
    out.relative = true;
    out.provenance = "uniform(seed=" + std::to_string(seed) + ")";
    out.scenarios.reserve(n);
    SplitMix64 rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        Vec v(out.dim);
        for (std::size_t q = 0; q < out.dim; ++q)
            v[q] = region_half_widths[q] * (2.0 * rng.next_unit() - 1.0);
        out.scenarios.push_back(std::move(v));
    }
    return out;
}

ScenarioSet project_to_farms(const ScenarioSet& factors, const AffineMap& map) {
    if (map.domain_dim() != factors.dim)
        throw DimensionMismatch("project_to_farms: map domain != scenario dim");
    ScenarioSet out;
    out.dim = map.range_dim();
    out.relative = false;
    out.provenance = factors.provenance + " -> farms";
    out.scenarios.reserve(factors.size());
    for (const auto& t : factors.scenarios) out.scenarios.push_back(map.apply(t));
    return out;
}

ScenarioSet load_scenarios_csv(const std::filesystem::path& path, std::size_t dim) {
    std::ifstream f(path);
    if (!f) throw ParseError(path.string() + ": cannot open scenario file");

    ScenarioSet out;
    out.dim = dim;
    out.provenance = path.string();

    std::string line;
    std::size_t line_no = 0;
    bool saw_data = false;
    while (std::getline(f, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '#') {
            if (line.find("relative") != std::string::npos) out.relative = true;
            continue;
        }
        // optional non-numeric header row
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!saw_data) {
            bool numeric = true;
            try {
                std::size_t used = 0;
                (void)std::stod(cells.at(0), &used);
            } catch (const std::exception&) {
                numeric = false;
            }
            if (!numeric) continue;  // header row
        }
        if (cells.size() != dim)
            throw DimensionMismatch(path.string() + ":" + std::to_string(line_no) +
                                    ": expected " + std::to_string(dim) +
                                    " columns, got " + std::to_string(cells.size()));
        Vec v(dim);
        for (std::size_t q = 0; q < dim; ++q) {
            try {
                std::size_t used = 0;
                v[q] = std::stod(cells[q], &used);
                if (used != cells[q].find_last_not_of(" \t") + 1 &&
                    used != cells[q].size())
                    throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                throw ParseError(path.string() + ":" + std::to_string(line_no) +
                                 ": non-numeric value '" + cells[q] + "'");
            }
            if (!std::isfinite(v[q]))
                throw ParseError(path.string() + ":" + std::to_string(line_no) +
                                 ": non-finite value");
        }
        out.scenarios.push_back(std::move(v));
        saw_data = true;
    }
    if (out.scenarios.empty()) throw ParseError(path.string() + ": empty scenario file");
    return out;
}

std::pair<ScenarioSet, ScenarioSet> split_holdout(const ScenarioSet& s,
                                                  std::size_t n_train,
                                                  std::uint64_t seed) {
    const std::size_t n = s.size();
    if (n_train < 1 || n_train >= n)
        throw InvalidSplit("split_holdout: need 1 <= n_train < N");

    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    SplitMix64 rng(seed);
    for (std::size_t i = n; i-- > 1;) {
        const std::size_t j = std::size_t(rng.next() % (i + 1));
        std::swap(idx[i], idx[j]);
    }
    std::vector<std::size_t> train_idx(idx.begin(), idx.begin() + long(n_train));
    std::vector<std::size_t> hold_idx(idx.begin() + long(n_train), idx.end());
    ScenarioSet train = s.select(train_idx);
    ScenarioSet hold = s.select(hold_idx);
    train.provenance = s.provenance + " [train]";
    hold.provenance = s.provenance + " [holdout]";
    return {std::move(train), std::move(hold)};
}

}  // namespace sced
