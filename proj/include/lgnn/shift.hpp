#pragma once

#include <array>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "lgnn/graph.hpp"

namespace lgnn {

enum class ShiftKind {
    Adjacency,                    // A
    SelfLoopAdjacency,            // I + A
    NormalizedSelfLoopAdjacency,  // D^-1/2 (I + A) D^-1/2, D = degrees of I + A
    RowStochasticSelfLoop,        // D^-1 (I + A)
    ColStochasticSelfLoop,        // (I + A) D^-1
    Laplacian,                    // D - A
    NormalizedLaplacian,          // I - D^-1/2 A D^-1/2, isolated rows/cols zero
};

inline constexpr std::array<ShiftKind, 7> kAllShiftKinds = {
    ShiftKind::Adjacency,          ShiftKind::SelfLoopAdjacency,     ShiftKind::NormalizedSelfLoopAdjacency,
    ShiftKind::RowStochasticSelfLoop, ShiftKind::ColStochasticSelfLoop, ShiftKind::Laplacian,
    ShiftKind::NormalizedLaplacian,
};

/// CLI names: adj, sl-adj, nsl-adj, row-sl, col-sl, lap, nlap.
std::string_view to_string(ShiftKind kind);
/// Throws ParameterError for unknown names.
ShiftKind parse_shift_kind(std::string_view name);
bool is_symmetric_kind(ShiftKind kind);

struct ShiftMatrix {
    ShiftKind kind;
    Eigen::MatrixXd matrix;

    int size() const { return static_cast<int>(matrix.rows()); }
};

ShiftMatrix build_shift(const Graph& g, ShiftKind kind);

/// Wraps an arbitrary square operator, e.g. the identity in tests.
ShiftMatrix custom_shift(Eigen::MatrixXd matrix, ShiftKind tag = ShiftKind::Adjacency);

}  // namespace lgnn
