#include "beliefsim/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "beliefsim/errors.hpp"

namespace beliefsim {

Matrix mat_mul(const Matrix& x, const Matrix& y) {
    if (x.cols != y.rows) throw validation_error("mat_mul: dimension mismatch");
    Matrix out(x.rows, y.cols);
    for (int i = 0; i < x.rows; ++i)
        for (int k = 0; k < x.cols; ++k) {
            const double v = x(i, k);
            if (v == 0.0) continue;
            for (int j = 0; j < y.cols; ++j) out(i, j) += v * y(k, j);
        }
    return out;
}

std::vector<double> mat_vec(const Matrix& m, std::span<const double> v) {
    if (m.cols != static_cast<int>(v.size())) throw validation_error("mat_vec: dimension mismatch");
    std::vector<double> out(static_cast<std::size_t>(m.rows), 0.0);
    for (int i = 0; i < m.rows; ++i) {
        double s = 0.0;
        for (int j = 0; j < m.cols; ++j) s += m(i, j) * v[static_cast<std::size_t>(j)];
        out[static_cast<std::size_t>(i)] = s;
    }
    return out;
}

std::vector<double> vec_mat(std::span<const double> v, const Matrix& m) {
    if (m.rows != static_cast<int>(v.size())) throw validation_error("vec_mat: dimension mismatch");
    std::vector<double> out(static_cast<std::size_t>(m.cols), 0.0);
    for (int i = 0; i < m.rows; ++i) {
        const double vi = v[static_cast<std::size_t>(i)];
        if (vi == 0.0) continue;
        for (int j = 0; j < m.cols; ++j) out[static_cast<std::size_t>(j)] += vi * m(i, j);
    }
    return out;
}

double max_abs_diff(const Matrix& x, const Matrix& y) {
    if (x.rows != y.rows || x.cols != y.cols)
        throw validation_error("max_abs_diff: dimension mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < x.a.size(); ++i) m = std::max(m, std::abs(x.a[i] - y.a[i]));
    return m;
}

std::vector<double> solve_linear(Matrix a, std::vector<double> b) {
    if (a.rows != a.cols || a.rows != static_cast<int>(b.size()))
        throw validation_error("solve_linear: dimension mismatch");
    const int n = a.rows;

    // Scale reference for the singularity test.
    double scale = 0.0;
    for (double x : a.a) scale = std::max(scale, std::abs(x));
    if (scale == 0.0) throw numeric_error("solve_linear: zero matrix");

    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
        if (std::abs(a(pivot, col)) < 1e-13 * scale)
            throw numeric_error("solve_linear: matrix is singular to working precision");
        if (pivot != col) {
            for (int j = 0; j < n; ++j) std::swap(a(pivot, j), a(col, j));
            std::swap(b[static_cast<std::size_t>(pivot)], b[static_cast<std::size_t>(col)]);
        }
        for (int r = col + 1; r < n; ++r) {
            const double f = a(r, col) / a(col, col);
            if (f == 0.0) continue;
            a(r, col) = 0.0;
            for (int j = col + 1; j < n; ++j) a(r, j) -= f * a(col, j);
            b[static_cast<std::size_t>(r)] -= f * b[static_cast<std::size_t>(col)];
        }
    }
    std::vector<double> x(static_cast<std::size_t>(n), 0.0);
    for (int r = n - 1; r >= 0; --r) {
        double s = b[static_cast<std::size_t>(r)];
        for (int j = r + 1; j < n; ++j) s -= a(r, j) * x[static_cast<std::size_t>(j)];
        x[static_cast<std::size_t>(r)] = s / a(r, r);
    }
    return x;
}

namespace {

// residual and eigenvalue estimate for a candidate left vector (L1-normalized,
// nonnegative): value = sum_j (v^T M)_j  (exact for the true eigenvector).
std::pair<double, double> left_residual(const Matrix& m, const std::vector<double>& v) {
    std::vector<double> w = vec_mat(v, m);
    double value = 0.0;
    for (double x : w) value += x;
    double res = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j)
        res = std::max(res, std::abs(w[j] - value * v[j]));
    return {value, res};
}

} // namespace

PerronResult perron_left(const Matrix& m, double tol, long max_iter) {
    if (m.rows != m.cols || m.rows == 0) throw validation_error("perron_left: matrix must be square");
    for (double x : m.a)
        if (!(x >= 0.0)) throw validation_error("perron_left: matrix must be entrywise nonnegative");

    const int n = m.rows;
    std::vector<double> v(static_cast<std::size_t>(n), 1.0 / n);

    PerronResult best;
    best.residual = std::numeric_limits<double>::infinity();
    int stall = 0;
    long iter = 0;
    for (iter = 1; iter <= max_iter; ++iter) {
        // One step of v <- v^T (M + I), renormalized to sum 1.
        std::vector<double> w = vec_mat(v, m);
        double total = 0.0;
        for (int j = 0; j < n; ++j) {
            w[static_cast<std::size_t>(j)] += v[static_cast<std::size_t>(j)];
            total += w[static_cast<std::size_t>(j)];
        }
        if (!(total > 0.0)) throw numeric_error("perron_left: iteration collapsed to zero");
        for (double& x : w) x /= total;
        v = std::move(w);

        auto [value, res] = left_residual(m, v);
        if (res < best.residual * (1.0 - 1e-3) || best.left_vector.empty()) {
            best.value = value;
            best.left_vector = v;
            best.residual = res;
            stall = 0;
        } else {
            ++stall;
        }
        // Converged: at tolerance and no longer improving (we are at the noise floor).
        if (best.residual <= tol && stall >= 30) break;
    }
    best.iterations = std::min(iter, max_iter);
    if (best.residual > tol)
        throw convergence_error("perron_left: residual " + std::to_string(best.residual) +
                                " did not reach tolerance within iteration budget");
    // Exact renormalization so downstream aggregates can rely on sum == 1.
    double s = 0.0;
    for (double x : best.left_vector) s += x;
    for (double& x : best.left_vector) x /= s;
    return best;
}

} // namespace beliefsim
