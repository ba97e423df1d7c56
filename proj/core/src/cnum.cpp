#include "vstab/cnum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

namespace vstab {

namespace {

void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                             std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                             std::to_string(b.cols()));
    }
}

void require_square(const ComplexMatrix& a, const char* op) {
    if (!a.square()) {
        throw DimensionError(std::string(op) + ": matrix is not square");
    }
}

}  // namespace

// --- ComplexVector -----------------------------------------------------------

double ComplexVector::norm_inf() const noexcept {
    double m = 0.0;
    for (const auto& v : data_) m = std::max(m, std::abs(v));
    return m;
}

ComplexVector operator+(const ComplexVector& a, const ComplexVector& b) {
    if (a.size() != b.size()) throw DimensionError("vector add: length mismatch");
    ComplexVector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

ComplexVector operator-(const ComplexVector& a, const ComplexVector& b) {
    if (a.size() != b.size()) throw DimensionError("vector subtract: length mismatch");
    ComplexVector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

ComplexVector operator*(Complex s, const ComplexVector& a) {
    ComplexVector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = s * a[i];
    return out;
}

// --- ComplexMatrix -----------------------------------------------------------

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, Complex fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

ComplexMatrix::ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw DimensionError("matrix initializer: ragged rows");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const Complex> diag) {
    ComplexMatrix m(diag.size(), diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
    return m;
}

ComplexMatrix ComplexMatrix::transpose() const {
    ComplexMatrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
}

ComplexMatrix ComplexMatrix::adjoint() const {
    ComplexMatrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) t(c, r) = std::conj((*this)(r, c));
    return t;
}

ComplexMatrix ComplexMatrix::conj() const {
    ComplexMatrix out = *this;
    for (auto& v : out.data_) v = std::conj(v);
    return out;
}

double ComplexMatrix::norm_inf() const noexcept {
    double m = 0.0;
    for (std::size_t r = 0; r < rows_; ++r) {
        double s = 0.0;
        for (const auto& v : row(r)) s += std::abs(v);
        m = std::max(m, s);
    }
    return m;
}

double ComplexMatrix::max_abs() const noexcept {
    double m = 0.0;
    for (const auto& v : data_) m = std::max(m, std::abs(v));
    return m;
}

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols() != b.rows()) throw DimensionError("matrix multiply: inner dimension mismatch");
    ComplexMatrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const Complex aik = a(i, k);
            if (aik == Complex{}) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
        }
    }
    return out;
}

ComplexVector operator*(const ComplexMatrix& a, const ComplexVector& x) {
    if (a.cols() != x.size()) throw DimensionError("matrix-vector multiply: dimension mismatch");
    ComplexVector out(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        Complex s{};
        const auto r = a.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) s += r[j] * x[j];
        out[i] = s;
    }
    return out;
}

ComplexMatrix operator+(const ComplexMatrix& a, const ComplexMatrix& b) {
    require_same_shape(a, b, "matrix add");
    ComplexMatrix out(a.rows(), a.cols());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) = a(r, c) + b(r, c);
    return out;
}

ComplexMatrix operator-(const ComplexMatrix& a, const ComplexMatrix& b) {
    require_same_shape(a, b, "matrix subtract");
    ComplexMatrix out(a.rows(), a.cols());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) = a(r, c) - b(r, c);
    return out;
}

// --- LU ----------------------------------------------------------------------

LuFactorization::LuFactorization(const ComplexMatrix& a) : lu_(a), perm_(a.rows()) {
    require_square(a, "lu");
    const std::size_t n = a.rows();
    std::iota(perm_.begin(), perm_.end(), std::size_t{0});

    double min_pivot = std::numeric_limits<double>::infinity();
    double max_pivot = 0.0;

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        double best = std::abs(lu_(k, k));
        for (std::size_t r = k + 1; r < n; ++r) {
            const double v = std::abs(lu_(r, k));
            if (v > best) {
                best = v;
                p = r;
            }
        }
        min_pivot = std::min(min_pivot, best);
        max_pivot = std::max(max_pivot, best);
        if (best == 0.0) {
            pivot_ratio_ = 0.0;
            return;
        }
        if (p != k) {
            for (std::size_t c = 0; c < n; ++c) std::swap(lu_(k, c), lu_(p, c));
            std::swap(perm_[k], perm_[p]);
        }
        const Complex pivot = lu_(k, k);
        for (std::size_t r = k + 1; r < n; ++r) {
            const Complex f = lu_(r, k) / pivot;
            lu_(r, k) = f;
            if (f == Complex{}) continue;
            for (std::size_t c = k + 1; c < n; ++c) lu_(r, c) -= f * lu_(k, c);
        }
    }
    pivot_ratio_ = n == 0 ? 1.0 : min_pivot / max_pivot;
}

void LuFactorization::require_ok() const {
    if (!ok()) {
        throw SingularMatrixError("matrix is singular (pivot ratio " + std::to_string(pivot_ratio_) +
                                  " <= " + std::to_string(tol::kPivot) + ")");
    }
}

ComplexVector LuFactorization::solve(const ComplexVector& b) const {
    require_ok();
    const std::size_t n = size();
    if (b.size() != n) throw DimensionError("lu solve: right-hand side length mismatch");

    ComplexVector x(n);
    for (std::size_t i = 0; i < n; ++i) {
        Complex s = b[perm_[i]];
        for (std::size_t j = 0; j < i; ++j) s -= lu_(i, j) * x[j];
        x[i] = s;
    }
    for (std::size_t i = n; i-- > 0;) {
        Complex s = x[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= lu_(i, j) * x[j];
        x[i] = s / lu_(i, i);
    }
    return x;
}

ComplexMatrix LuFactorization::solve(const ComplexMatrix& b) const {
    require_ok();
    if (b.rows() != size()) throw DimensionError("lu solve: right-hand side row mismatch");
    ComplexMatrix out(b.rows(), b.cols());
    ComplexVector col(b.rows());
    for (std::size_t c = 0; c < b.cols(); ++c) {
        for (std::size_t r = 0; r < b.rows(); ++r) col[r] = b(r, c);
        const auto x = solve(col);
        for (std::size_t r = 0; r < b.rows(); ++r) out(r, c) = x[r];
    }
    return out;
}

ComplexVector lu_solve(const ComplexMatrix& a, const ComplexVector& b) {
    require_square(a, "lu_solve");
    if (a.rows() != b.size()) throw DimensionError("lu_solve: right-hand side length mismatch");
    return LuFactorization(a).solve(b);
}

ComplexMatrix invert(const ComplexMatrix& a) {
    require_square(a, "invert");
    return LuFactorization(a).solve(ComplexMatrix::identity(a.rows()));
}

// --- SVD ---------------------------------------------------------------------

std::vector<double> singular_values(const ComplexMatrix& a) {
    // One-sided (Hestenes) Jacobi on the columns of A. Each step applies a
    // unitary 2x2 rotation that makes one column pair orthogonal; at
    // convergence the column norms are the singular values.
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    ComplexMatrix w = a.rows() >= a.cols() ? a : a.adjoint();
    const std::size_t rows = std::max(m, n);
    const std::size_t cols = std::min(m, n);

    constexpr int kMaxSweeps = 60;
    constexpr double kEps = std::numeric_limits<double>::epsilon();

    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < cols; ++p) {
            for (std::size_t q = p + 1; q < cols; ++q) {
                double alpha = 0.0;
                double beta = 0.0;
                Complex gamma{};
                for (std::size_t r = 0; r < rows; ++r) {
                    alpha += std::norm(w(r, p));
                    beta += std::norm(w(r, q));
                    gamma += std::conj(w(r, p)) * w(r, q);
                }
                const double g = std::abs(gamma);
                if (g == 0.0 || g <= kEps * std::sqrt(alpha * beta)) continue;
                rotated = true;

                // Rotate column q by the phase of gamma so the pair has a real
                // inner product, then apply a real Jacobi rotation.
                const Complex phase = std::conj(gamma) / g;
                const double zeta = (beta - alpha) / (2.0 * g);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t r = 0; r < rows; ++r) {
                    const Complex ap = w(r, p);
                    const Complex aq = w(r, q) * phase;
                    w(r, p) = c * ap - s * aq;
                    w(r, q) = s * ap + c * aq;
                }
            }
        }
        if (!rotated) break;
    }

    std::vector<double> sigma(cols);
    for (std::size_t c = 0; c < cols; ++c) {
        double s = 0.0;
        for (std::size_t r = 0; r < rows; ++r) s += std::norm(w(r, c));
        sigma[c] = std::sqrt(s);
    }
    std::sort(sigma.begin(), sigma.end(), std::greater<>());
    return sigma;
}

double min_singular_value(const ComplexMatrix& a) {
    require_square(a, "min_singular_value");
    if (a.rows() == 0) return 0.0;
    if (!LuFactorization(a).ok()) return 0.0;
    return singular_values(a).back();
}

}  // namespace vstab
