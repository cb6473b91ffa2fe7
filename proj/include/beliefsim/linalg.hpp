#pragma once

#include <span>
#include <vector>

namespace beliefsim {

/// Minimal dense row-major matrix. Everything in this project is desk scale
/// (a dozen agents, a handful of states), so no BLAS, no expression templates.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(int r, int c, double fill = 0.0)
        : rows(r), cols(c), a(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill) {}

    static Matrix identity(int n) {
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }

    bool operator==(const Matrix&) const = default;
};

Matrix mat_mul(const Matrix& x, const Matrix& y);
std::vector<double> mat_vec(const Matrix& m, std::span<const double> v);
std::vector<double> vec_mat(std::span<const double> v, const Matrix& m);
double max_abs_diff(const Matrix& x, const Matrix& y);

/// Solves a*x = b by Gaussian elimination with partial pivoting.
/// Throws numeric_error when the system is singular.
std::vector<double> solve_linear(Matrix a, std::vector<double> b);

struct PerronResult {
    double value = 0.0;                 // dominant eigenvalue
    std::vector<double> left_vector;    // entrywise positive, sums to 1
    double residual = 0.0;              // max_j |(v^T M)_j - value * v_j|
    long iterations = 0;
};

/// Dominant eigenvalue and left eigenvector of a nonnegative square matrix by
/// power iteration on the transpose. The iteration runs on M + I: the unit
/// diagonal shift makes the dominant eigenvalue strictly dominant even for
/// periodic structures (directed cycles), where the unshifted iteration would
/// oscillate forever; the shift is subtracted from the reported value. After
/// reaching `tol` the loop keeps going while the residual still improves, so
/// results normally land at the float noise floor rather than exactly at tol.
PerronResult perron_left(const Matrix& m, double tol = 1e-10, long max_iter = 1'000'000);

} // namespace beliefsim
