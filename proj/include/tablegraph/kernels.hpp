#pragma once

#include <vector>

#include "tablegraph/matrix.hpp"

namespace tablegraph {

// Dense and sparse kernels used by the learners. Each kernel has an
// OpenMP-parallel entry point and a serial reference in kernels::serial.
// The parallel versions split work by output row only, so every element is
// accumulated in the same order as the serial code and results are
// bit-identical for any thread count.

/// CSR-style grouping of edges by the node that receives their message.
/// entry e of node i: edge id edge_ids[e], far-end node other[e].
struct EdgeIndex {
    std::vector<int> offsets;   // size n+1
    std::vector<int> edge_ids;  // size m
    std::vector<int> other;     // size m

    int nodes() const { return static_cast<int>(offsets.size()) - 1; }
};

/// Symmetric sparse matrix in CSR form (used for the normalized adjacency).
struct SparseRows {
    int n = 0;
    std::vector<int> offsets;  // size n+1
    std::vector<int> cols;
    std::vector<double> values;
};

namespace kernels {

// out = a * b
void matmul(const Matrix& a, const Matrix& b, Matrix& out);
// out = a^T * b
void matmul_at_b(const Matrix& a, const Matrix& b, Matrix& out);
// out = a * b^T
void matmul_a_bt(const Matrix& a, const Matrix& b, Matrix& out);
// out = s * h  (sparse * dense)
void spmm(const SparseRows& s, const Matrix& h, Matrix& out);
// out[i] += sum over entries e of node i: scale[edge_ids[e]] * h[other[e]]
void gated_accumulate(const EdgeIndex& idx, const std::vector<double>& scale,
                      const Matrix& h, Matrix& out);
// per edge j received by node i: out[j] = dot(g[i], h[other[j]])
void edge_dots(const EdgeIndex& idx, const Matrix& g, const Matrix& h,
               std::vector<double>& out);

namespace serial {
void matmul(const Matrix& a, const Matrix& b, Matrix& out);
void matmul_at_b(const Matrix& a, const Matrix& b, Matrix& out);
void matmul_a_bt(const Matrix& a, const Matrix& b, Matrix& out);
void spmm(const SparseRows& s, const Matrix& h, Matrix& out);
void gated_accumulate(const EdgeIndex& idx, const std::vector<double>& scale,
                      const Matrix& h, Matrix& out);
void edge_dots(const EdgeIndex& idx, const Matrix& g, const Matrix& h,
               std::vector<double>& out);
}  // namespace serial

}  // namespace kernels
}  // namespace tablegraph
