#pragma once

// Dense complex linear algebra for desk-scale network matrices.
//
// Everything here is O(n^3) dense: LU with partial pivoting, solves,
// inversion, and a one-sided Jacobi SVD for the smallest singular value.
// Matrices are row-major values; no sparse storage.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vstab {

using Complex = std::complex<double>;

namespace tol {
/// Minimum ratio min|pivot| / max|pivot| for a matrix to count as invertible.
inline constexpr double kPivot = 1e-10;
/// Relative residual bound for lu_solve: |Ax - b|_inf <= kResidual * (1 + |b|_inf).
inline constexpr double kResidual = 1e-10;
}  // namespace tol

/// Raised when a factorization meets a pivot ratio below tol::kPivot.
class SingularMatrixError : public std::runtime_error {
  public:
    explicit SingularMatrixError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised on incompatible operand shapes.
class DimensionError : public std::invalid_argument {
  public:
    explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

class ComplexVector {
  public:
    ComplexVector() = default;
    explicit ComplexVector(std::size_t n, Complex fill = {}) : data_(n, fill) {}
    ComplexVector(std::initializer_list<Complex> init) : data_(init) {}
    explicit ComplexVector(std::vector<Complex> values) : data_(std::move(values)) {}

    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    Complex& operator[](std::size_t i) { return data_[i]; }
    const Complex& operator[](std::size_t i) const { return data_[i]; }

    [[nodiscard]] auto begin() noexcept { return data_.begin(); }
    [[nodiscard]] auto end() noexcept { return data_.end(); }
    [[nodiscard]] auto begin() const noexcept { return data_.begin(); }
    [[nodiscard]] auto end() const noexcept { return data_.end(); }

    [[nodiscard]] std::span<const Complex> view() const noexcept { return data_; }
    [[nodiscard]] const std::vector<Complex>& values() const noexcept { return data_; }

    /// Infinity norm: max |x_i|, 0 for an empty vector.
    [[nodiscard]] double norm_inf() const noexcept;

    friend bool operator==(const ComplexVector&, const ComplexVector&) = default;

  private:
    std::vector<Complex> data_;
};

ComplexVector operator+(const ComplexVector& a, const ComplexVector& b);
ComplexVector operator-(const ComplexVector& a, const ComplexVector& b);
ComplexVector operator*(Complex s, const ComplexVector& a);

class ComplexMatrix {
  public:
    ComplexMatrix() = default;
    ComplexMatrix(std::size_t rows, std::size_t cols, Complex fill = {});
    /// Row-major nested initializer; all rows must share one length.
    ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows);

    static ComplexMatrix identity(std::size_t n);
    static ComplexMatrix diagonal(std::span<const Complex> diag);

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] bool square() const noexcept { return rows_ == cols_; }

    Complex& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const Complex& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    [[nodiscard]] std::span<const Complex> row(std::size_t r) const {
        return {data_.data() + r * cols_, cols_};
    }
    [[nodiscard]] std::span<const Complex> entries() const noexcept { return data_; }

    [[nodiscard]] ComplexMatrix transpose() const;
    [[nodiscard]] ComplexMatrix adjoint() const;
    /// Element-wise conjugate (no transpose).
    [[nodiscard]] ComplexMatrix conj() const;

    /// Max absolute row sum.
    [[nodiscard]] double norm_inf() const noexcept;
    /// Max |a_ij|.
    [[nodiscard]] double max_abs() const noexcept;

    friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Complex> data_;
};

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexVector operator*(const ComplexMatrix& a, const ComplexVector& x);
ComplexMatrix operator+(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix operator-(const ComplexMatrix& a, const ComplexMatrix& b);

/// LU factorization with partial pivoting, P*A = L*U stored compactly.
/// Construction never throws on singular input; query ok() / pivot_ratio().
class LuFactorization {
  public:
    explicit LuFactorization(const ComplexMatrix& a);

    [[nodiscard]] std::size_t size() const noexcept { return lu_.rows(); }
    /// min|u_kk| / max|u_kk|; 0 when a zero pivot was met, 1 for an empty matrix.
    [[nodiscard]] double pivot_ratio() const noexcept { return pivot_ratio_; }
    [[nodiscard]] bool ok() const noexcept { return pivot_ratio_ > tol::kPivot; }

    /// Throws SingularMatrixError unless ok().
    [[nodiscard]] ComplexVector solve(const ComplexVector& b) const;
    [[nodiscard]] ComplexMatrix solve(const ComplexMatrix& b) const;

  private:
    void require_ok() const;

    ComplexMatrix lu_;
    std::vector<std::size_t> perm_;
    double pivot_ratio_ = 1.0;
};

/// Solves A x = b with partial pivoting. Throws SingularMatrixError when the
/// pivot ratio falls below tol::kPivot.
ComplexVector lu_solve(const ComplexMatrix& a, const ComplexVector& b);

/// A^{-1}; throws SingularMatrixError under the same rule as lu_solve.
ComplexMatrix invert(const ComplexMatrix& a);

/// Smallest singular value via one-sided Jacobi. Returns exactly 0 for any
/// matrix whose LU pivot ratio is at or below tol::kPivot, so it agrees with
/// LuFactorization::ok() on the shared threshold.
double min_singular_value(const ComplexMatrix& a);

/// All singular values in descending order (one-sided Jacobi, no threshold).
std::vector<double> singular_values(const ComplexMatrix& a);

}  // namespace vstab
