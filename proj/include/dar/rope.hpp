#pragma once

// Rotary position embeddings over 2D positions and over 4D
// (current position, next position) coordinates.

#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

#include "dar/scan.hpp"

namespace dar {

enum class RopeMode : uint8_t { TwoD, FourD };

inline const char* rope_name(RopeMode m) { return m == RopeMode::TwoD ? "2d" : "4d"; }

inline RopeMode rope_from_name(const std::string& s) {
    if (s == "2d") return RopeMode::TwoD;
    if (s == "4d") return RopeMode::FourD;
    throw std::invalid_argument("unknown rope mode '" + s + "' (expected 2d|4d)");
}

// A token's own grid position together with its successor's. Coordinates are
// negative only for the class-token sentinel.
struct Position4D {
    Position2D cur;
    Position2D nxt;

    bool operator==(const Position4D&) const = default;
};

inline void check_head_dim(int head_dim, RopeMode mode) {
    const int div = mode == RopeMode::TwoD ? 4 : 8;
    if (head_dim <= 0 || head_dim % div != 0) {
        throw std::invalid_argument("head_dim " + std::to_string(head_dim) + " must be a positive multiple of " +
                                    std::to_string(div) + " for " + rope_name(mode) + " rope");
    }
}

// theta_t = 10000^(-t / (head_dim/4)) for 2D, 10000^(-t / (head_dim/8)) for 4D,
// with t running over one slot group.
inline std::vector<double> frequencies(int head_dim, RopeMode mode) {
    check_head_dim(head_dim, mode);
    const int count = mode == RopeMode::TwoD ? head_dim / 4 : head_dim / 8;
    std::vector<double> theta(static_cast<size_t>(count));
    for (int t = 0; t < count; ++t) {
        theta[static_cast<size_t>(t)] = std::pow(10000.0, -static_cast<double>(t) / count);
    }
    return theta;
}

// Per-position, per-frequency-slot unit rotation factors. Angles are kept in
// double; the application site casts down to the working scalar type.
struct RotationTable {
    int head_dim = 0;
    int rows = 0;
    int slots = 0;  // head_dim / 2
    std::vector<std::complex<double>> entries;  // rows x slots

    const std::complex<double>& at(int n, int j) const {
        return entries[static_cast<size_t>(n) * slots + j];
    }
};

inline RotationTable rotation_table_2d(std::span<const Position2D> positions, int head_dim) {
    check_head_dim(head_dim, RopeMode::TwoD);
    const auto theta = frequencies(head_dim, RopeMode::TwoD);
    RotationTable tab;
    tab.head_dim = head_dim;
    tab.rows = static_cast<int>(positions.size());
    tab.slots = head_dim / 2;
    tab.entries.resize(static_cast<size_t>(tab.rows) * tab.slots);
    for (int n = 0; n < tab.rows; ++n) {
        auto* row = tab.entries.data() + static_cast<size_t>(n) * tab.slots;
        for (size_t t = 0; t < theta.size(); ++t) {
            row[2 * t] = std::polar(1.0, theta[t] * positions[n].x);
            row[2 * t + 1] = std::polar(1.0, theta[t] * positions[n].y);
        }
    }
    return tab;
}

inline RotationTable rotation_table_4d(std::span<const Position4D> positions, int head_dim) {
    check_head_dim(head_dim, RopeMode::FourD);
    const auto theta = frequencies(head_dim, RopeMode::FourD);
    RotationTable tab;
    tab.head_dim = head_dim;
    tab.rows = static_cast<int>(positions.size());
    tab.slots = head_dim / 2;
    tab.entries.resize(static_cast<size_t>(tab.rows) * tab.slots);
    for (int n = 0; n < tab.rows; ++n) {
        auto* row = tab.entries.data() + static_cast<size_t>(n) * tab.slots;
        for (size_t t = 0; t < theta.size(); ++t) {
            row[4 * t] = std::polar(1.0, theta[t] * positions[n].cur.x);
            row[4 * t + 1] = std::polar(1.0, theta[t] * positions[n].cur.y);
            row[4 * t + 2] = std::polar(1.0, theta[t] * positions[n].nxt.x);
            row[4 * t + 3] = std::polar(1.0, theta[t] * positions[n].nxt.y);
        }
    }
    return tab;
}

// Rotate one head_dim-wide vector in place using table row n. Consecutive
// real pairs (v[2j], v[2j+1]) are complex-multiplied by entry (n, j).
template <typename T>
inline void rotate_row(T* v, const RotationTable& tab, int n) {
    const auto* row = tab.entries.data() + static_cast<size_t>(n) * tab.slots;
    for (int j = 0; j < tab.slots; ++j) {
        const T c = static_cast<T>(row[j].real());
        const T s = static_cast<T>(row[j].imag());
        const T re = v[2 * j];
        const T im = v[2 * j + 1];
        v[2 * j] = re * c - im * s;
        v[2 * j + 1] = re * s + im * c;
    }
}

// Inverse rotation (conjugate factors); the backward pass of rotate_row.
template <typename T>
inline void rotate_row_conj(T* v, const RotationTable& tab, int n) {
    const auto* row = tab.entries.data() + static_cast<size_t>(n) * tab.slots;
    for (int j = 0; j < tab.slots; ++j) {
        const T c = static_cast<T>(row[j].real());
        const T s = static_cast<T>(-row[j].imag());
        const T re = v[2 * j];
        const T im = v[2 * j + 1];
        v[2 * j] = re * c - im * s;
        v[2 * j + 1] = re * s + im * c;
    }
}

// Rotate every row of an [n, head_dim] buffer with the matching table row.
template <typename T>
inline void apply_rotation(std::vector<T>& vecs, const RotationTable& tab) {
    if (vecs.size() != static_cast<size_t>(tab.rows) * tab.head_dim) {
        throw std::invalid_argument("apply_rotation: buffer size does not match rows x head_dim");
    }
    for (int n = 0; n < tab.rows; ++n) {
        rotate_row(vecs.data() + static_cast<size_t>(n) * tab.head_dim, tab, n);
    }
}

}  // namespace dar
