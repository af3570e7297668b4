#pragma once

// Raster and diagonal scan orders over 2D token grids, with per-step
// generation-direction labels.

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace dar {

struct GridShape {
    int h = 0;
    int w = 0;

    int tokens() const { return h * w; }
    bool operator==(const GridShape&) const = default;
};

inline void validate(const GridShape& s) {
    if (s.h < 1 || s.w < 1) throw std::invalid_argument("grid shape requires h >= 1 and w >= 1");
}

struct Position2D {
    int x = 0;  // row
    int y = 0;  // col

    bool operator==(const Position2D&) const = default;
};

enum class DirectionLabel : uint8_t {
    Right = 0,
    Down = 1,
    UpRight = 2,
    DownLeft = 3,
    LineBreak = 4,
    Start = 5,  // reserved for the class-token slot
};

constexpr int kNumDirections = 6;

inline const char* direction_name(DirectionLabel d) {
    switch (d) {
        case DirectionLabel::Right: return "Right";
        case DirectionLabel::Down: return "Down";
        case DirectionLabel::UpRight: return "UpRight";
        case DirectionLabel::DownLeft: return "DownLeft";
        case DirectionLabel::LineBreak: return "LineBreak";
        case DirectionLabel::Start: return "Start";
    }
    return "?";
}

enum class ScanKind : uint8_t { Raster, Diagonal };

inline const char* scan_name(ScanKind k) {
    return k == ScanKind::Raster ? "raster" : "diagonal";
}

inline ScanKind scan_from_name(const std::string& s) {
    if (s == "raster") return ScanKind::Raster;
    if (s == "diagonal") return ScanKind::Diagonal;
    throw std::invalid_argument("unknown scan order '" + s + "' (expected raster|diagonal)");
}

// Label for the step prev -> next under the given order's vocabulary.
// Raster steps are Right within a row and LineBreak at row ends; diagonal
// steps use the four grid directions.
inline DirectionLabel direction_for_step(Position2D prev, Position2D next, ScanKind kind) {
    const int dx = next.x - prev.x;
    const int dy = next.y - prev.y;
    if (kind == ScanKind::Raster) {
        if (dx == 0 && dy == 1) return DirectionLabel::Right;
        if (dx == 1 && dy <= 0) return DirectionLabel::LineBreak;
    } else {
        if (dx == 0 && dy == 1) return DirectionLabel::Right;
        if (dx == 1 && dy == 0) return DirectionLabel::Down;
        if (dx == -1 && dy == 1) return DirectionLabel::UpRight;
        if (dx == 1 && dy == -1) return DirectionLabel::DownLeft;
    }
    throw std::invalid_argument("step (" + std::to_string(dx) + "," + std::to_string(dy) +
                                ") is not a valid " + scan_name(kind) + " step");
}

struct ScanOrder {
    GridShape shape;
    ScanKind kind = ScanKind::Raster;
    std::vector<Position2D> positions;     // length T, bijection onto the grid
    std::vector<DirectionLabel> directions;  // length T-1, step n -> n+1
};

namespace detail {

inline ScanOrder finish_order(GridShape shape, ScanKind kind, std::vector<Position2D> positions) {
    ScanOrder order;
    order.shape = shape;
    order.kind = kind;
    order.positions = std::move(positions);
    order.directions.reserve(order.positions.size() > 0 ? order.positions.size() - 1 : 0);
    for (size_t n = 0; n + 1 < order.positions.size(); ++n) {
        order.directions.push_back(direction_for_step(order.positions[n], order.positions[n + 1], kind));
    }
    return order;
}

}  // namespace detail

inline ScanOrder raster_order(GridShape shape) {
    validate(shape);
    std::vector<Position2D> pos;
    pos.reserve(static_cast<size_t>(shape.tokens()));
    for (int x = 0; x < shape.h; ++x) {
        for (int y = 0; y < shape.w; ++y) pos.push_back({x, y});
    }
    return detail::finish_order(shape, ScanKind::Raster, std::move(pos));
}

// Anti-diagonals d = x + y visited in increasing d. Odd diagonals run
// bottom-left to top-right, even ones top-right to bottom-left, so every
// consecutive step stays within Euclidean distance sqrt(2).
inline ScanOrder diagonal_order(GridShape shape) {
    validate(shape);
    std::vector<Position2D> pos;
    pos.reserve(static_cast<size_t>(shape.tokens()));
    const int dmax = shape.h - 1 + shape.w - 1;
    for (int d = 0; d <= dmax; ++d) {
        const int xlo = std::max(0, d - (shape.w - 1));
        const int xhi = std::min(shape.h - 1, d);
        if (d % 2 == 1) {
            for (int x = xhi; x >= xlo; --x) pos.push_back({x, d - x});  // upward run
        } else {
            for (int x = xlo; x <= xhi; ++x) pos.push_back({x, d - x});  // downward run
        }
    }
    return detail::finish_order(shape, ScanKind::Diagonal, std::move(pos));
}

inline ScanOrder make_order(GridShape shape, ScanKind kind) {
    return kind == ScanKind::Raster ? raster_order(shape) : diagonal_order(shape);
}

// Index map: grid cell (row-major x*w + y) -> sequence index.
inline std::vector<int> inverse_permutation(const ScanOrder& order) {
    std::vector<int> inv(static_cast<size_t>(order.shape.tokens()), -1);
    for (size_t n = 0; n < order.positions.size(); ++n) {
        const auto& p = order.positions[n];
        inv[static_cast<size_t>(p.x) * order.shape.w + p.y] = static_cast<int>(n);
    }
    return inv;
}

struct AdjacencyStats {
    double max_step_dist = 0.0;
    double mean_step_dist = 0.0;
    std::map<DirectionLabel, int> direction_histogram;
};

inline AdjacencyStats adjacency_stats(const ScanOrder& order) {
    if (order.positions.size() < 2) {
        throw std::invalid_argument("adjacency_stats requires at least two positions");
    }
    AdjacencyStats st;
    double sum = 0.0;
    for (size_t n = 0; n + 1 < order.positions.size(); ++n) {
        const double dx = order.positions[n + 1].x - order.positions[n].x;
        const double dy = order.positions[n + 1].y - order.positions[n].y;
        const double dist = std::sqrt(dx * dx + dy * dy);
        st.max_step_dist = std::max(st.max_step_dist, dist);
        sum += dist;
        st.direction_histogram[order.directions[n]] += 1;
    }
    st.mean_step_dist = sum / static_cast<double>(order.directions.size());
    return st;
}

}  // namespace dar
