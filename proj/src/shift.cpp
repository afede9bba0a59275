#include "lgnn/shift.hpp"

#include <cmath>

#include "lgnn/error.hpp"

namespace lgnn {

namespace {

struct KindName {
    ShiftKind kind;
    std::string_view name;
};

constexpr std::array<KindName, 7> kNames = {{
    {ShiftKind::Adjacency, "adj"},
    {ShiftKind::SelfLoopAdjacency, "sl-adj"},
    {ShiftKind::NormalizedSelfLoopAdjacency, "nsl-adj"},
    {ShiftKind::RowStochasticSelfLoop, "row-sl"},
    {ShiftKind::ColStochasticSelfLoop, "col-sl"},
    {ShiftKind::Laplacian, "lap"},
    {ShiftKind::NormalizedLaplacian, "nlap"},
}};

}  // namespace

std::string_view to_string(ShiftKind kind) {
    for (const auto& entry : kNames) {
        if (entry.kind == kind) return entry.name;
    }
    return "unknown";
}

ShiftKind parse_shift_kind(std::string_view name) {
    for (const auto& entry : kNames) {
        if (entry.name == name) return entry.kind;
    }
    throw ParameterError("unknown shift kind '" + std::string(name) +
                         "' (expected adj, sl-adj, nsl-adj, row-sl, col-sl, lap or nlap)");
}

bool is_symmetric_kind(ShiftKind kind) {
    return kind != ShiftKind::RowStochasticSelfLoop && kind != ShiftKind::ColStochasticSelfLoop;
}

ShiftMatrix build_shift(const Graph& g, ShiftKind kind) {
    const int n = g.num_nodes();
    const Eigen::MatrixXd a = g.adjacency_matrix();
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    const Eigen::VectorXd deg = a.rowwise().sum();
    const Eigen::MatrixXd self_loop = id + a;
    const Eigen::VectorXd deg_hat = deg.array() + 1.0;

    Eigen::MatrixXd s;
    switch (kind) {
        case ShiftKind::Adjacency:
            s = a;
            break;
        case ShiftKind::SelfLoopAdjacency:
            s = self_loop;
            break;
        case ShiftKind::NormalizedSelfLoopAdjacency: {
            const Eigen::VectorXd inv_sqrt = deg_hat.array().rsqrt();
            s = inv_sqrt.asDiagonal() * self_loop * inv_sqrt.asDiagonal();
            break;
        }
        case ShiftKind::RowStochasticSelfLoop:
            s = deg_hat.cwiseInverse().asDiagonal() * self_loop;
            break;
        case ShiftKind::ColStochasticSelfLoop:
            s = self_loop * deg_hat.cwiseInverse().asDiagonal();
            break;
        case ShiftKind::Laplacian:
            s = Eigen::MatrixXd(deg.asDiagonal()) - a;
            break;
        case ShiftKind::NormalizedLaplacian: {
            Eigen::VectorXd inv_sqrt(n);
            Eigen::VectorXd diag(n);
            for (int i = 0; i < n; ++i) {
                const bool isolated = deg(i) == 0.0;
                inv_sqrt(i) = isolated ? 0.0 : 1.0 / std::sqrt(deg(i));
                diag(i) = isolated ? 0.0 : 1.0;
            }
            s = Eigen::MatrixXd(diag.asDiagonal()) - inv_sqrt.asDiagonal() * a * inv_sqrt.asDiagonal();
            break;
        }
    }
    return ShiftMatrix{kind, std::move(s)};
}

ShiftMatrix custom_shift(Eigen::MatrixXd matrix, ShiftKind tag) {
    if (matrix.rows() != matrix.cols() || matrix.rows() == 0) {
        throw ShapeError("shift operator must be square and nonempty");
    }
    return ShiftMatrix{tag, std::move(matrix)};
}

}  // namespace lgnn
