#include "tablegraph/kernels.hpp"

#include <cassert>

namespace tablegraph::kernels {

namespace {

inline void matmul_row(const Matrix& a, const Matrix& b, Matrix& out, int i) {
    const int k_dim = a.cols();
    const int n = b.cols();
    double* dst = out.row(i);
    for (int j = 0; j < n; ++j) dst[j] = 0.0;
    const double* arow = a.row(i);
    for (int k = 0; k < k_dim; ++k) {
        const double av = arow[k];
        if (av == 0.0) continue;
        const double* brow = b.row(k);
        for (int j = 0; j < n; ++j) dst[j] += av * brow[j];
    }
}

inline void matmul_at_b_row(const Matrix& a, const Matrix& b, Matrix& out, int i) {
    // row i of a^T b: sum_k a(k,i) * b(k,:)
    const int n = b.cols();
    double* dst = out.row(i);
    for (int j = 0; j < n; ++j) dst[j] = 0.0;
    for (int k = 0; k < a.rows(); ++k) {
        const double av = a(k, i);
        if (av == 0.0) continue;
        const double* brow = b.row(k);
        for (int j = 0; j < n; ++j) dst[j] += av * brow[j];
    }
}

inline void matmul_a_bt_row(const Matrix& a, const Matrix& b, Matrix& out, int i) {
    const int k_dim = a.cols();
    const double* arow = a.row(i);
    double* dst = out.row(i);
    for (int j = 0; j < b.rows(); ++j) {
        const double* brow = b.row(j);
        double acc = 0.0;
        for (int k = 0; k < k_dim; ++k) acc += arow[k] * brow[k];
        dst[j] = acc;
    }
}

inline void spmm_row(const SparseRows& s, const Matrix& h, Matrix& out, int i) {
    const int n = h.cols();
    double* dst = out.row(i);
    for (int j = 0; j < n; ++j) dst[j] = 0.0;
    for (int e = s.offsets[i]; e < s.offsets[i + 1]; ++e) {
        const double w = s.values[e];
        const double* src = h.row(s.cols[e]);
        for (int j = 0; j < n; ++j) dst[j] += w * src[j];
    }
}

inline void gated_row(const EdgeIndex& idx, const std::vector<double>& scale,
                      const Matrix& h, Matrix& out, int i) {
    const int n = h.cols();
    double* dst = out.row(i);
    for (int e = idx.offsets[i]; e < idx.offsets[i + 1]; ++e) {
        const double w = scale[idx.edge_ids[e]];
        if (w == 0.0) continue;
        const double* src = h.row(idx.other[e]);
        for (int j = 0; j < n; ++j) dst[j] += w * src[j];
    }
}

inline void edge_dots_node(const EdgeIndex& idx, const Matrix& g, const Matrix& h,
                           std::vector<double>& out, int i) {
    const int n = g.cols();
    const double* grow = g.row(i);
    for (int e = idx.offsets[i]; e < idx.offsets[i + 1]; ++e) {
        const double* hrow = h.row(idx.other[e]);
        double acc = 0.0;
        for (int j = 0; j < n; ++j) acc += grow[j] * hrow[j];
        out[idx.edge_ids[e]] = acc;
    }
}

}  // namespace

void matmul(const Matrix& a, const Matrix& b, Matrix& out) {
    assert(a.cols() == b.rows());
    out = Matrix(a.rows(), b.cols());
#pragma omp parallel for schedule(static)
    for (int i = 0; i < a.rows(); ++i) matmul_row(a, b, out, i);
}

void matmul_at_b(const Matrix& a, const Matrix& b, Matrix& out) {
    assert(a.rows() == b.rows());
    out = Matrix(a.cols(), b.cols());
#pragma omp parallel for schedule(static)
    for (int i = 0; i < a.cols(); ++i) matmul_at_b_row(a, b, out, i);
}

void matmul_a_bt(const Matrix& a, const Matrix& b, Matrix& out) {
    assert(a.cols() == b.cols());
    out = Matrix(a.rows(), b.rows());
#pragma omp parallel for schedule(static)
    for (int i = 0; i < a.rows(); ++i) matmul_a_bt_row(a, b, out, i);
}

void spmm(const SparseRows& s, const Matrix& h, Matrix& out) {
    assert(s.n == h.rows());
    out = Matrix(s.n, h.cols());
#pragma omp parallel for schedule(static)
    for (int i = 0; i < s.n; ++i) spmm_row(s, h, out, i);
}

void gated_accumulate(const EdgeIndex& idx, const std::vector<double>& scale,
                      const Matrix& h, Matrix& out) {
    assert(out.rows() == idx.nodes() && out.cols() == h.cols());
#pragma omp parallel for schedule(static)
    for (int i = 0; i < idx.nodes(); ++i) gated_row(idx, scale, h, out, i);
}

void edge_dots(const EdgeIndex& idx, const Matrix& g, const Matrix& h,
               std::vector<double>& out) {
    out.assign(idx.edge_ids.size(), 0.0);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < idx.nodes(); ++i) edge_dots_node(idx, g, h, out, i);
}

namespace serial {

void matmul(const Matrix& a, const Matrix& b, Matrix& out) {
    out = Matrix(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i) matmul_row(a, b, out, i);
}

void matmul_at_b(const Matrix& a, const Matrix& b, Matrix& out) {
    out = Matrix(a.cols(), b.cols());
    for (int i = 0; i < a.cols(); ++i) matmul_at_b_row(a, b, out, i);
}

void matmul_a_bt(const Matrix& a, const Matrix& b, Matrix& out) {
    out = Matrix(a.rows(), b.rows());
    for (int i = 0; i < a.rows(); ++i) matmul_a_bt_row(a, b, out, i);
}

void spmm(const SparseRows& s, const Matrix& h, Matrix& out) {
    out = Matrix(s.n, h.cols());
    for (int i = 0; i < s.n; ++i) spmm_row(s, h, out, i);
}

void gated_accumulate(const EdgeIndex& idx, const std::vector<double>& scale,
                      const Matrix& h, Matrix& out) {
    for (int i = 0; i < idx.nodes(); ++i) gated_row(idx, scale, h, out, i);
}

void edge_dots(const EdgeIndex& idx, const Matrix& g, const Matrix& h,
               std::vector<double>& out) {
    out.assign(idx.edge_ids.size(), 0.0);
    for (int i = 0; i < idx.nodes(); ++i) edge_dots_node(idx, g, h, out, i);
}

}  // namespace serial
}  // namespace tablegraph::kernels
