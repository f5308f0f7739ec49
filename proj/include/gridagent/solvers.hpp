#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace gridagent {

// Row-major dense matrix, sized for desk-scale problems (tens of rows).
struct Mat {
    size_t rows = 0, cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(size_t r, size_t c) : rows(r), cols(c), a(r * c, 0.0) {}
    double& operator()(size_t i, size_t j) { return a[i * cols + j]; }
    double operator()(size_t i, size_t j) const { return a[i * cols + j]; }
};

struct SingularMatrix : std::runtime_error {
    SingularMatrix() : std::runtime_error("singular linear system") {}
};

// Solve M x = rhs by Gaussian elimination with partial pivoting. M is copied.
inline std::vector<double> solve_dense(Mat m, std::vector<double> rhs) {
    if (m.rows != m.cols || m.rows != rhs.size()) throw std::invalid_argument("solve_dense: shape mismatch");
    const size_t n = m.rows;
    for (size_t col = 0; col < n; ++col) {
        size_t pivot = col;
        for (size_t r = col + 1; r < n; ++r)
            if (std::fabs(m(r, col)) > std::fabs(m(pivot, col))) pivot = r;
        if (std::fabs(m(pivot, col)) < 1e-12) throw SingularMatrix();
        if (pivot != col) {
            for (size_t j = 0; j < n; ++j) std::swap(m(col, j), m(pivot, j));
            std::swap(rhs[col], rhs[pivot]);
        }
        for (size_t r = col + 1; r < n; ++r) {
            const double f = m(r, col) / m(col, col);
            if (f == 0.0) continue;
            for (size_t j = col; j < n; ++j) m(r, j) -= f * m(col, j);
            rhs[r] -= f * rhs[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (size_t i = n; i-- > 0;) {
        double sum = rhs[i];
        for (size_t j = i + 1; j < n; ++j) sum -= m(i, j) * x[j];
        x[i] = sum / m(i, i);
    }
    return x;
}

// Nonnegative least squares per Lawson-Hanson: min ||Ax - b|| with x >= 0.
// Active-set iteration; normal equations are fine at this scale.
inline std::vector<double> solve_nnls(const Mat& A, const std::vector<double>& b,
                                      double tol = 1e-12) {
    const size_t m = A.rows, n = A.cols;
    if (b.size() != m) throw std::invalid_argument("solve_nnls: shape mismatch");
    std::vector<double> x(n, 0.0);
    std::vector<bool> passive(n, false);

    auto residual = [&]() {
        std::vector<double> r(m);
        for (size_t i = 0; i < m; ++i) {
            double s = b[i];
            for (size_t j = 0; j < n; ++j) s -= A(i, j) * x[j];
            r[i] = s;
        }
        return r;
    };
    auto gradient = [&](const std::vector<double>& r) {
        std::vector<double> w(n);
        for (size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (size_t i = 0; i < m; ++i) s += A(i, j) * r[i];
            w[j] = s;
        }
        return w;
    };
    // Least squares restricted to the passive set, via normal equations.
    auto restricted_ls = [&]() {
        std::vector<size_t> idx;
        for (size_t j = 0; j < n; ++j)
            if (passive[j]) idx.push_back(j);
        const size_t k = idx.size();
        Mat ata(k, k);
        std::vector<double> atb(k, 0.0);
        for (size_t p = 0; p < k; ++p) {
            for (size_t q = 0; q <= p; ++q) {
                double s = 0.0;
                for (size_t i = 0; i < m; ++i) s += A(i, idx[p]) * A(i, idx[q]);
                ata(p, q) = ata(q, p) = s;
            }
            double s = 0.0;
            for (size_t i = 0; i < m; ++i) s += A(i, idx[p]) * b[i];
            atb[p] = s;
        }
        std::vector<double> zk = solve_dense(ata, atb);
        std::vector<double> z(n, 0.0);
        for (size_t p = 0; p < k; ++p) z[idx[p]] = zk[p];
        return z;
    };

    const size_t max_outer = 4 * n + 16;
    for (size_t outer = 0; outer < max_outer; ++outer) {
        auto w = gradient(residual());
        size_t best = n;
        double best_w = tol;
        for (size_t j = 0; j < n; ++j)
            if (!passive[j] && w[j] > best_w) { best_w = w[j]; best = j; }
        if (best == n) break; // KKT satisfied
        passive[best] = true;

        for (size_t inner = 0; inner < max_outer; ++inner) {
            std::vector<double> z = restricted_ls();
            bool all_positive = true;
            for (size_t j = 0; j < n; ++j)
                if (passive[j] && z[j] <= tol) { all_positive = false; break; }
            if (all_positive) {
                x = z;
                break;
            }
            double alpha = std::numeric_limits<double>::infinity();
            for (size_t j = 0; j < n; ++j)
                if (passive[j] && z[j] <= tol) {
                    const double denom = x[j] - z[j];
                    if (denom > 0.0) alpha = std::min(alpha, x[j] / denom);
                }
            if (!std::isfinite(alpha)) alpha = 0.0;
            for (size_t j = 0; j < n; ++j)
                if (passive[j]) x[j] += alpha * (z[j] - x[j]);
            for (size_t j = 0; j < n; ++j)
                if (passive[j] && x[j] <= tol) { passive[j] = false; x[j] = 0.0; }
        }
    }
    return x;
}

struct LdpResult {
    bool feasible = false;
    std::vector<double> x;
};

// Least distance programming: min ||x||_2 subject to G x >= h.
// Reduced to an NNLS problem in the constraint multipliers (Lawson-Hanson
// chapter 23 construction).
inline LdpResult solve_ldp(const Mat& G, const std::vector<double>& h) {
    const size_t m = G.rows, n = G.cols;
    if (h.size() != m) throw std::invalid_argument("solve_ldp: shape mismatch");
    Mat E(n + 1, m);
    for (size_t j = 0; j < m; ++j) {
        for (size_t i = 0; i < n; ++i) E(i, j) = G(j, i);
        E(n, j) = h[j];
    }
    std::vector<double> f(n + 1, 0.0);
    f[n] = 1.0;
    std::vector<double> u = solve_nnls(E, f);

    std::vector<double> r(n + 1, 0.0);
    for (size_t i = 0; i <= n; ++i) {
        double s = -f[i];
        for (size_t j = 0; j < m; ++j) s += E(i, j) * u[j];
        r[i] = s;
    }
    double rnorm = 0.0;
    for (double v : r) rnorm += v * v;
    rnorm = std::sqrt(rnorm);

    LdpResult out;
    if (rnorm < 1e-10 || std::fabs(r[n]) < 1e-12) return out; // incompatible constraints
    out.feasible = true;
    out.x.resize(n);
    for (size_t i = 0; i < n; ++i) out.x[i] = -r[i] / r[n];
    return out;
}

struct LpResult {
    bool feasible = false;
    bool bounded = true;
    double objective = 0.0;
    std::vector<double> x;
};

// Two-phase primal simplex with Bland's rule on the standard form
// min c.x subject to A x = b, x >= 0. Small and dense on purpose.
class SimplexSolver {
public:
    static LpResult solve(const Mat& A, std::vector<double> b, const std::vector<double>& c) {
        const size_t m = A.rows, n = A.cols;
        if (b.size() != m || c.size() != n) throw std::invalid_argument("simplex: shape mismatch");

        // Tableau with artificial variables appended; rows normalized to b >= 0.
        Mat T(m, n + m);
        for (size_t i = 0; i < m; ++i) {
            double sign = (b[i] < 0.0) ? -1.0 : 1.0;
            for (size_t j = 0; j < n; ++j) T(i, j) = sign * A(i, j);
            b[i] *= sign;
            T(i, n + i) = 1.0;
        }
        std::vector<size_t> basis(m);
        for (size_t i = 0; i < m; ++i) basis[i] = n + i;

        // Phase 1: drive the artificial objective to zero.
        std::vector<double> phase1(n + m, 0.0);
        for (size_t i = 0; i < m; ++i) phase1[n + i] = 1.0;
        LpResult out;
        if (!run(T, b, phase1, basis, n + m)) { out.bounded = false; return out; }
        double art = 0.0;
        for (size_t i = 0; i < m; ++i)
            if (basis[i] >= n) art += b[i];
        if (art > 1e-9) return out; // infeasible

        // Pivot any residual artificial out of the basis if possible.
        for (size_t i = 0; i < m; ++i) {
            if (basis[i] < n) continue;
            for (size_t j = 0; j < n; ++j) {
                if (std::fabs(T(i, j)) > 1e-9) {
                    pivot(T, b, basis, i, j);
                    break;
                }
            }
        }

        // Phase 2 on the original objective, artificial columns frozen.
        std::vector<double> cost(n + m, 0.0);
        for (size_t j = 0; j < n; ++j) cost[j] = c[j];
        if (!run(T, b, cost, basis, n)) { out.bounded = false; return out; }

        out.feasible = true;
        out.x.assign(n, 0.0);
        for (size_t i = 0; i < m; ++i)
            if (basis[i] < n) out.x[basis[i]] = b[i];
        for (size_t j = 0; j < n; ++j) out.objective += c[j] * out.x[j];
        return out;
    }

private:
    static void pivot(Mat& T, std::vector<double>& b, std::vector<size_t>& basis,
                      size_t row, size_t col) {
        const size_t w = T.cols;
        const double p = T(row, col);
        for (size_t j = 0; j < w; ++j) T(row, j) /= p;
        b[row] /= p;
        for (size_t i = 0; i < T.rows; ++i) {
            if (i == row) continue;
            const double f = T(i, col);
            if (f == 0.0) continue;
            for (size_t j = 0; j < w; ++j) T(i, j) -= f * T(row, j);
            b[i] -= f * b[row];
        }
        basis[row] = col;
    }

    // Returns false on unboundedness. `limit` restricts entering columns so
    // phase 2 never re-admits artificials.
    static bool run(Mat& T, std::vector<double>& b, const std::vector<double>& cost,
                    std::vector<size_t>& basis, size_t limit) {
        const size_t m = T.rows;
        for (size_t iter = 0; iter < 10000; ++iter) {
            // Reduced costs: c_j - c_B . B^{-1} A_j (tableau is already B^{-1} A).
            size_t enter = limit;
            for (size_t j = 0; j < limit; ++j) {
                double rc = cost[j];
                for (size_t i = 0; i < m; ++i) rc -= cost[basis[i]] * T(i, j);
                if (rc < -1e-9) { enter = j; break; } // Bland: first improving column
            }
            if (enter == limit) return true;
            size_t leave = m;
            double best_ratio = std::numeric_limits<double>::infinity();
            for (size_t i = 0; i < m; ++i) {
                if (T(i, enter) > 1e-9) {
                    const double ratio = b[i] / T(i, enter);
                    if (ratio < best_ratio - 1e-12 ||
                        (ratio < best_ratio + 1e-12 && (leave == m || basis[i] < basis[leave]))) {
                        best_ratio = ratio;
                        leave = i;
                    }
                }
            }
            if (leave == m) return false;
            pivot(T, b, basis, leave, enter);
        }
        return false;
    }
};

} // namespace gridagent
