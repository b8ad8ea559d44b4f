#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "sced/compress.hpp"
#include "sced/lp.hpp"
#include "sced/scenario.hpp"

using namespace sced;

namespace {

ScenarioSet make_set(std::vector<Vec> pts) {
    ScenarioSet s;
    s.dim = pts.empty() ? 0 : pts[0].size();
    s.scenarios = std::move(pts);
    return s;
}

/// Membership via convex-combination feasibility over the vertex list; an
/// independent route from the halfspace test inside contains().
bool member_by_lp(const Polytope& p, const Vec& w) {
    LPProblem lp(p.num_vertices());
    for (std::size_t j = 0; j < p.num_vertices(); ++j) lp.lower[j] = 0.0;
    Vec row(p.num_vertices());
    for (std::size_t q = 0; q < p.dim; ++q) {
        for (std::size_t j = 0; j < p.num_vertices(); ++j) row[j] = p.vertices[j][q];
        lp.add_row(row, Relation::Equal, w[q], RowGroup::deterministic());
    }
    std::fill(row.begin(), row.end(), 1.0);
    lp.add_row(row, Relation::Equal, 1.0, RowGroup::deterministic());
    return solve_lp(lp).status == LPStatus::Optimal;
}

}  // namespace

TEST_SUITE_BEGIN("compress");

TEST_CASE("interior points are excluded from the hull vertex list") {
    const auto s = make_set({{0, 0}, {1, 0}, {0, 1}, {0.2, 0.2}});
    const Polytope p = convex_hull(s);
    CHECK(p.num_vertices() == 3);
    CHECK(p.vertex_indices == std::vector<std::size_t>{0, 1, 2});
    for (const auto& w : s.scenarios) CHECK(contains(p, w));
}

TEST_CASE("collinear input is degenerate") {
    const auto s = make_set({{0, 0}, {1, 1}, {2, 2}, {3, 3}});
    CHECK_THROWS_AS(convex_hull(s), DegenerateInput);
}

TEST_CASE("dimension limits") {
    ScenarioSet s;
    s.dim = 7;
    s.scenarios.assign(10, Vec(7, 0.0));
    CHECK_THROWS_AS(convex_hull(s), DimensionTooHigh);
    ScenarioSet s1;
    s1.dim = 1;
    s1.scenarios.assign(10, Vec(1, 0.0));
    CHECK_THROWS_AS(convex_hull(s1), DimensionTooHigh);
}

TEST_CASE("boundary midpoints are not vertices") {
    const auto s = make_set({{0, 0}, {0.5, 0.0}, {1, 0}, {1, 1}, {0, 1}});
    const Polytope p = convex_hull(s);
    CHECK(p.num_vertices() == 4);
    for (std::size_t idx : p.vertex_indices) CHECK(idx != 1);
}

TEST_CASE("uniform cloud: halfspaces hold, vertices match the brute oracle") {
    SplitMix64 rng(123);
    std::vector<Vec> pts;
    for (int i = 0; i < 200; ++i) pts.push_back({rng.next_unit(), rng.next_unit()});
    const auto s = make_set(pts);
    const Polytope p = convex_hull(s);

    for (const auto& w : pts) CHECK(contains(p, w));
    for (std::size_t idx : p.vertex_indices)
        CHECK_FALSE(oracle::on_segment_between_others(pts, idx, 1e-9));

    const auto brute = oracle::brute_extreme_points(pts, 2);
    CHECK(p.vertex_indices == brute);
}

TEST_CASE("3d gaussian cloud matches the brute oracle") {
    const ScenarioSet s = sample_gaussian_regions(Vec{0.02, 0.04, 0.06}, 120, 3141);
    const Polytope p = convex_hull(s);
    for (const auto& w : s.scenarios) CHECK(contains(p, w));
    const auto brute = oracle::brute_extreme_points(s.scenarios, 3);
    CHECK(p.vertex_indices == brute);
}

TEST_CASE("halfspace and vertex representations agree on random probes") {
    const ScenarioSet s = sample_gaussian_regions(Vec{0.5, 0.3}, 80, 555);
    const Polytope p = convex_hull(s);
    SplitMix64 rng(777);
    int agreements = 0;
    for (int i = 0; i < 1000; ++i) {
        Vec w{3.0 * (rng.next_unit() - 0.5), 2.0 * (rng.next_unit() - 0.5)};
        // skip probes within 1e-6 of any facet plane: both representations
        // are tolerance-based and may legitimately disagree inside that band
        bool near_face = false;
        for (std::size_t h = 0; h < p.num_halfspaces(); ++h) {
            const double d = dot(p.halfspace_normals.row(h), w) - p.halfspace_offsets[h];
            if (std::abs(d) < 1e-6) near_face = true;
        }
        if (near_face) continue;
        CHECK(contains(p, w) == member_by_lp(p, w));
        ++agreements;
    }
    CHECK(agreements > 900);
}

TEST_CASE("box hull bounds, touching set and minimality") {
    const auto s = make_set({{0, 5}, {1, 3}, {0.5, 4}});
    const Box b = box_hull(s);
    CHECK(b.lower == Vec{0, 3});
    CHECK(b.upper == Vec{1, 5});
    // scenarios 0 and 1 jointly attain all four bounds
    CHECK(b.touching == std::vector<std::size_t>{0, 1});

    // exhaustive cover check: every bound attained by some member
    for (std::size_t q = 0; q < 2; ++q) {
        bool lo = false, hi = false;
        for (std::size_t i : b.touching) {
            if (s.scenarios[i][q] == b.lower[q]) lo = true;
            if (s.scenarios[i][q] == b.upper[q]) hi = true;
        }
        CHECK(lo);
        CHECK(hi);
    }
    // minimality: dropping any member loses a bound
    for (std::size_t drop = 0; drop < b.touching.size(); ++drop) {
        bool all_covered = true;
        for (std::size_t q = 0; q < 2 && all_covered; ++q) {
            bool lo = false, hi = false;
            for (std::size_t k = 0; k < b.touching.size(); ++k) {
                if (k == drop) continue;
                if (s.scenarios[b.touching[k]][q] == b.lower[q]) lo = true;
                if (s.scenarios[b.touching[k]][q] == b.upper[q]) hi = true;
            }
            all_covered = lo && hi;
        }
        CHECK_FALSE(all_covered);
    }
}

TEST_CASE("single scenario gives a degenerate box") {
    const auto s = make_set({{2.5, -1.0}});
    const Box b = box_hull(s);
    CHECK(b.lower == b.upper);
    CHECK(b.touching == std::vector<std::size_t>{0});
    CHECK(contains(b, Vec{2.5, -1.0}));
}

TEST_CASE("gaussian box touches every face and holds every point") {
    const ScenarioSet s = sample_gaussian_regions(Vec{0.02, 0.04, 0.06}, 500, 2222);
    const Box b = box_hull(s);
    for (const auto& w : s.scenarios) CHECK(contains(b, w));
    for (std::size_t q = 0; q < 3; ++q) {
        bool lo = false, hi = false;
        for (const auto& w : s.scenarios) {
            if (w[q] == b.lower[q]) lo = true;
            if (w[q] == b.upper[q]) hi = true;
        }
        CHECK(lo);
        CHECK(hi);
    }
    CHECK(b.touching.size() <= 6);  // never more than 2m
}

TEST_CASE("compression function and complexity") {
    // square corners plus interior points: the hull keeps exactly the corners
    const auto sq = make_set(
        {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.3, 0.4}, {0.6, 0.2}, {0.5, 0.5}});
    CHECK(compression_function(sq, CompressionMethod::Hull) ==
          std::vector<std::size_t>{0, 1, 2, 3});
    CHECK(compression_complexity(sq, CompressionMethod::Hull) == 4);

    const auto tri = make_set({{0, 0}, {2, 0}, {0, 2}, {0.5, 0.5}});
    CHECK(compression_complexity(tri, CompressionMethod::Hull) == 3);

    SplitMix64 rng(9);
    for (std::size_t m = 2; m <= 4; ++m) {
        for (int trial = 0; trial < 10; ++trial) {
            ScenarioSet s = sample_gaussian_regions(Vec(m, 0.1), 60, rng.next());
            CHECK(compression_complexity(s, CompressionMethod::Box) <= 2 * m);
        }
    }
}

TEST_CASE("hull is contained in the box") {
    const ScenarioSet s = sample_gaussian_regions(Vec{0.3, 0.2}, 100, 31);
    const Polytope hull = convex_hull(s);
    const Box box = box_hull(s);
    SplitMix64 rng(32);
    for (int i = 0; i < 300; ++i) {
        // random convex combination of hull vertices lies in the hull
        Vec weights(hull.num_vertices());
        double sum = 0.0;
        for (auto& v : weights) {
            v = rng.next_unit();
            sum += v;
        }
        Vec w(2, 0.0);
        for (std::size_t j = 0; j < hull.num_vertices(); ++j)
            for (std::size_t q = 0; q < 2; ++q)
                w[q] += weights[j] / sum * hull.vertices[j][q];
        CHECK(contains(hull, w));
        CHECK(contains(box, w));
    }
}

TEST_CASE("adding points that do not move the compression keeps it unchanged") {
    SplitMix64 rng(64);
    for (int trial = 0; trial < 5; ++trial) {
        ScenarioSet s = sample_gaussian_regions(Vec{0.2, 0.2}, 50, rng.next());
        for (auto method : {CompressionMethod::Hull, CompressionMethod::Box}) {
            const auto base = compression_function(s, method);

            // collect interior probes whose one-at-a-time addition is neutral
            std::vector<Vec> neutral;
            while (neutral.size() < 5) {
                const Vec cand{0.05 * (rng.next_unit() - 0.5),
                               0.05 * (rng.next_unit() - 0.5)};
                ScenarioSet probe = s;
                probe.scenarios.push_back(cand);
                if (compression_function(probe, method) == base)
                    neutral.push_back(cand);
            }
            ScenarioSet joint = s;
            for (const auto& w : neutral) joint.scenarios.push_back(w);
            CHECK(compression_function(joint, method) == base);
        }
    }
}

TEST_CASE("a rejected subset stays rejected after adding scenarios") {
    SplitMix64 rng(65);
    ScenarioSet s = sample_gaussian_regions(Vec{0.2, 0.2}, 40, 12);
    for (auto method : {CompressionMethod::Hull, CompressionMethod::Box}) {
        const auto c_u = compression_function(s, method);
        // candidate V: drop one member of c(U), add an interior index
        std::vector<std::size_t> v = c_u;
        v.pop_back();
        REQUIRE(v != c_u);
        for (int probes = 0; probes < 10; ++probes) {
            ScenarioSet bigger = s;
            bigger.scenarios.push_back(
                {0.5 * (rng.next_unit() - 0.5), 0.5 * (rng.next_unit() - 0.5)});
            CHECK(compression_function(bigger, method) != v);
        }
    }
}

TEST_CASE("compression risk counting") {
    const auto s = make_set({{0, 0}, {4, 0}, {0, 4}, {4, 4}});
    const Box b = box_hull(s);
    ScenarioSet inside;
    inside.dim = 2;
    inside.scenarios = {{1, 1}, {2, 3}, {3.99, 0.01}};
    CHECK(estimate_compression_risk(b, inside) == doctest::Approx(0.0));

    ScenarioSet outside;
    outside.dim = 2;
    outside.scenarios = {{5, 5}, {-1, 2}};
    CHECK(estimate_compression_risk(b, outside) == doctest::Approx(1.0));

    const Polytope p = convex_hull(s);
    CHECK(estimate_compression_risk(p, inside) == doctest::Approx(0.0));
    CHECK(contains(p, Vec{0, 0}));  // boundary counts as inside
    CHECK(contains(b, Vec{4, 4}));

    ScenarioSet empty;
    empty.dim = 2;
    CHECK_THROWS_AS(estimate_compression_risk(b, empty), EmptyHoldout);
}

TEST_SUITE_END();
