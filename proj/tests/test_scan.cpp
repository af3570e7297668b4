#include <catch2/catch_amalgamated.hpp>

#include <dar/dar.hpp>

#include <cmath>
#include <set>
#include <vector>

using namespace dar;

namespace {

// Independent bijection check: every grid cell appears exactly once.
bool is_bijection(const ScanOrder& order) {
    std::set<std::pair<int, int>> seen;
    for (const auto& p : order.positions) {
        if (p.x < 0 || p.x >= order.shape.h || p.y < 0 || p.y >= order.shape.w) return false;
        if (!seen.insert({p.x, p.y}).second) return false;
    }
    return static_cast<int>(seen.size()) == order.shape.tokens();
}

double step_dist(Position2D a, Position2D b) {
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

TEST_CASE("diagonal 3x3 enumerates the exact zigzag order") {
    const ScanOrder order = diagonal_order({3, 3});
    const std::vector<Position2D> want = {{0, 0}, {1, 0}, {0, 1}, {0, 2}, {1, 1},
                                          {2, 0}, {2, 1}, {1, 2}, {2, 2}};
    REQUIRE(order.positions == want);

    using D = DirectionLabel;
    const std::vector<D> want_dirs = {D::Down,     D::UpRight, D::Right,   D::DownLeft,
                                      D::DownLeft, D::Right,   D::UpRight, D::Down};
    REQUIRE(order.directions == want_dirs);

    const AdjacencyStats st = adjacency_stats(order);
    REQUIRE(st.direction_histogram.at(D::Right) == 2);
    REQUIRE(st.direction_histogram.at(D::Down) == 2);
    REQUIRE(st.direction_histogram.at(D::UpRight) == 2);
    REQUIRE(st.direction_histogram.at(D::DownLeft) == 2);
    REQUIRE(st.direction_histogram.size() == 4);
}

TEST_CASE("diagonal order is a bijection with steps <= sqrt(2) for all shapes up to 32x32") {
    const double limit = std::sqrt(2.0) + 1e-12;
    for (int h = 1; h <= 32; ++h) {
        for (int w = 1; w <= 32; ++w) {
            const ScanOrder order = diagonal_order({h, w});
            REQUIRE(is_bijection(order));
            for (size_t n = 0; n + 1 < order.positions.size(); ++n) {
                REQUIRE(step_dist(order.positions[n], order.positions[n + 1]) <= limit);
            }
        }
    }
}

TEST_CASE("diagonal anti-diagonal index never decreases and alternates run direction") {
    for (int h : {1, 2, 3, 5, 8}) {
        for (int w : {1, 2, 4, 7, 8}) {
            const ScanOrder order = diagonal_order({h, w});
            int last_d = 0;
            for (const auto& p : order.positions) {
                const int d = p.x + p.y;
                REQUIRE(d >= last_d);
                last_d = d;
            }
            // Within an odd diagonal x strictly decreases; within an even one it increases.
            for (size_t n = 0; n + 1 < order.positions.size(); ++n) {
                const auto& a = order.positions[n];
                const auto& b = order.positions[n + 1];
                if (a.x + a.y != b.x + b.y) continue;
                if ((a.x + a.y) % 2 == 1) {
                    REQUIRE(b.x == a.x - 1);
                } else {
                    REQUIRE(b.x == a.x + 1);
                }
            }
        }
    }
}

TEST_CASE("raster order is a bijection; 16x16 max step distance is sqrt(15^2+1)") {
    const ScanOrder order = raster_order({16, 16});
    REQUIRE(is_bijection(order));
    const AdjacencyStats st = adjacency_stats(order);
    REQUIRE(st.max_step_dist == Catch::Approx(std::sqrt(15.0 * 15.0 + 1.0)).epsilon(1e-12));
}

TEST_CASE("raster row breaks span the full row width") {
    // A row break jumps from (x, w-1) to (x+1, 0): length sqrt(1 + (w-1)^2).
    // That exceeds the diagonal bound sqrt(2) for every w >= 3.
    const double limit = std::sqrt(2.0) + 1e-12;
    for (int h = 2; h <= 12; ++h) {
        for (int w = 2; w <= 12; ++w) {
            const ScanOrder order = raster_order({h, w});
            const AdjacencyStats st = adjacency_stats(order);
            REQUIRE(st.max_step_dist == Catch::Approx(std::hypot(1.0, w - 1.0)).epsilon(1e-12));
            if (w >= 3) REQUIRE(st.max_step_dist > limit);
        }
    }
}

TEST_CASE("direction labels depend on the scan vocabulary") {
    // Raster end-of-row steps are LineBreak even when geometrically down-left.
    REQUIRE(direction_for_step({0, 1}, {1, 0}, ScanKind::Raster) == DirectionLabel::LineBreak);
    REQUIRE(direction_for_step({0, 1}, {1, 0}, ScanKind::Diagonal) == DirectionLabel::DownLeft);
    REQUIRE(direction_for_step({0, 0}, {0, 1}, ScanKind::Raster) == DirectionLabel::Right);
    REQUIRE(direction_for_step({0, 0}, {1, 0}, ScanKind::Diagonal) == DirectionLabel::Down);
    REQUIRE(direction_for_step({2, 0}, {1, 1}, ScanKind::Diagonal) == DirectionLabel::UpRight);
    // A w=2 raster line break moves (+1,-1), still LineBreak.
    const ScanOrder narrow = raster_order({3, 2});
    REQUIRE(narrow.directions == std::vector<DirectionLabel>{
                                     DirectionLabel::Right, DirectionLabel::LineBreak,
                                     DirectionLabel::Right, DirectionLabel::LineBreak,
                                     DirectionLabel::Right});
    REQUIRE_THROWS_AS(direction_for_step({0, 0}, {2, 0}, ScanKind::Diagonal), std::invalid_argument);
    REQUIRE_THROWS_AS(direction_for_step({0, 0}, {1, 1}, ScanKind::Raster), std::invalid_argument);
}

TEST_CASE("inverse permutation maps each cell to its sequence slot") {
    for (const ScanKind kind : {ScanKind::Raster, ScanKind::Diagonal}) {
        const ScanOrder order = make_order({5, 7}, kind);
        const std::vector<int> inv = inverse_permutation(order);
        REQUIRE(inv.size() == 35);
        for (size_t n = 0; n < order.positions.size(); ++n) {
            const auto& p = order.positions[n];
            REQUIRE(inv[static_cast<size_t>(p.x) * 7 + p.y] == static_cast<int>(n));
        }
    }
}

TEST_CASE("degenerate shapes") {
    REQUIRE(diagonal_order({1, 1}).positions == std::vector<Position2D>{{0, 0}});
    REQUIRE(diagonal_order({1, 1}).directions.empty());
    REQUIRE_THROWS_AS(diagonal_order({0, 3}), std::invalid_argument);
    REQUIRE_THROWS_AS(raster_order({3, 0}), std::invalid_argument);
    REQUIRE_THROWS_AS(adjacency_stats(diagonal_order({1, 1})), std::invalid_argument);

    // 1xN and Nx1 grids are pure Right / pure Down runs.
    const ScanOrder row = diagonal_order({1, 6});
    for (const auto d : row.directions) REQUIRE(d == DirectionLabel::Right);
    const ScanOrder col = diagonal_order({6, 1});
    for (const auto d : col.directions) REQUIRE(d == DirectionLabel::Down);
}

TEST_CASE("scan names round-trip and reject unknowns") {
    REQUIRE(scan_from_name("raster") == ScanKind::Raster);
    REQUIRE(scan_from_name("diagonal") == ScanKind::Diagonal);
    REQUIRE(scan_name(ScanKind::Diagonal) == std::string("diagonal"));
    REQUIRE_THROWS_AS(scan_from_name("zigzag"), std::invalid_argument);
}
