#pragma once

#include <initializer_list>
#include <optional>
#include <vector>

#include "rigid/errors.hpp"
#include "rigid/scalar.hpp"

namespace rigid {

template <class K>
class Matrix {
  public:
    Matrix() : rows_(0), cols_(0) {}
    Matrix(size_t rows, size_t cols) : rows_(rows), cols_(cols), a_(rows * cols) {}

    static Matrix identity(size_t n, const K& like) {
        Matrix m(n, n);
        for (size_t i = 0; i < n; ++i) m(i, i) = scalar_one(like);
        return m;
    }

    static Matrix from_rows(std::initializer_list<std::initializer_list<K>> rows) {
        Matrix m(rows.size(), rows.size() ? rows.begin()->size() : 0);
        size_t i = 0;
        for (const auto& r : rows) {
            size_t j = 0;
            for (const auto& x : r) m(i, j++) = x;
            ++i;
        }
        return m;
    }

    size_t rows() const { return rows_; }
    size_t cols() const { return cols_; }

    K& operator()(size_t i, size_t j) { return a_[i * cols_ + j]; }
    const K& operator()(size_t i, size_t j) const { return a_[i * cols_ + j]; }

    std::vector<K> col(size_t j) const {
        std::vector<K> v(rows_);
        for (size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
        return v;
    }

    friend Matrix operator+(const Matrix& x, const Matrix& y) {
        Matrix r(x.rows_, x.cols_);
        for (size_t i = 0; i < x.a_.size(); ++i) r.a_[i] = x.a_[i] + y.a_[i];
        return r;
    }
    friend Matrix operator-(const Matrix& x, const Matrix& y) {
        Matrix r(x.rows_, x.cols_);
        for (size_t i = 0; i < x.a_.size(); ++i) r.a_[i] = x.a_[i] - y.a_[i];
        return r;
    }
    friend Matrix operator*(const Matrix& x, const Matrix& y) {
        Matrix r(x.rows_, y.cols_);
        for (size_t i = 0; i < x.rows_; ++i)
            for (size_t k = 0; k < x.cols_; ++k) {
                if (is_zero(x(i, k))) continue;
                for (size_t j = 0; j < y.cols_; ++j)
                    r(i, j) = r(i, j) + x(i, k) * y(k, j);
            }
        return r;
    }
    friend bool operator==(const Matrix& x, const Matrix& y) {
        if (x.rows_ != y.rows_ || x.cols_ != y.cols_) return false;
        for (size_t i = 0; i < x.a_.size(); ++i)
            if (!(x.a_[i] == y.a_[i])) return false;
        return true;
    }

    bool all_zero() const {
        for (const auto& x : a_)
            if (!is_zero(x)) return false;
        return true;
    }

    Matrix hcat(const Matrix& other) const {
        Matrix r(rows_, cols_ + other.cols_);
        for (size_t i = 0; i < rows_; ++i) {
            for (size_t j = 0; j < cols_; ++j) r(i, j) = (*this)(i, j);
            for (size_t j = 0; j < other.cols_; ++j)
                r(i, cols_ + j) = other(i, j);
        }
        return r;
    }

  private:
    size_t rows_, cols_;
    std::vector<K> a_;
};

template <class K>
struct LinearSolve {
    // One column per column of b; empty optional when inconsistent.
    std::optional<Matrix<K>> particular;
    std::vector<std::vector<K>> kernel;
    size_t rank = 0;
    // Columns of A that carry a pivot, in elimination order.
    std::vector<size_t> pivot_cols;
    // Worst-case loss of absolute p-adic precision (0 over the rationals).
    long precision_loss = 0;
};

// Exact row reduction; over the p-adics pivots are chosen with minimal
// valuation and each pivot division is charged against the precision budget.
template <class K>
LinearSolve<K> solve_linear(const Matrix<K>& A, const Matrix<K>& b) {
    const size_t n = A.rows(), m = A.cols(), nb = b.cols();
    if (nb > 0 && b.rows() != n) throw Error("solve_linear: shape mismatch");
    Matrix<K> w = nb ? A.hcat(b) : A;
    std::vector<size_t> pivot_col;          // per pivot row
    std::vector<long> col_pivot(m, -1);     // column -> pivot row index
    LinearSolve<K> out;

    size_t row = 0;
    for (size_t col = 0; col < m && row < n; ++col) {
        size_t best = n;
        long best_val = 0;
        for (size_t i = row; i < n; ++i) {
            if (is_zero(w(i, col))) continue;
            long v = ScalarOps<K>::pivot_valuation(w(i, col));
            if (best == n || v < best_val) {
                best = i;
                best_val = v;
            }
        }
        if (best == n) continue;  // free column
        if (best != row)
            for (size_t j = 0; j < w.cols(); ++j) std::swap(w(row, j), w(best, j));
        if (best_val > 0) out.precision_loss += best_val;
        K piv = inv(w(row, col));
        for (size_t j = col; j < w.cols(); ++j) w(row, j) = w(row, j) * piv;
        for (size_t i = 0; i < n; ++i) {
            if (i == row || is_zero(w(i, col))) continue;
            K f = w(i, col);
            for (size_t j = col; j < w.cols(); ++j)
                w(i, j) = w(i, j) - f * w(row, j);
        }
        col_pivot[col] = static_cast<long>(row);
        pivot_col.push_back(col);
        ++row;
    }
    out.rank = pivot_col.size();
    out.pivot_cols = pivot_col;

    // kernel basis from the free columns
    for (size_t col = 0; col < m; ++col) {
        if (col_pivot[col] >= 0) continue;
        std::vector<K> v(m);
        v[col] = scalar_one_of(w, A, col);
        for (size_t pc = 0; pc < m; ++pc)
            if (col_pivot[pc] >= 0)
                v[pc] = -w(static_cast<size_t>(col_pivot[pc]), col);
        out.kernel.push_back(std::move(v));
    }

    if (nb > 0) {
        bool ok = true;
        for (size_t i = out.rank; i < n && ok; ++i)
            for (size_t j = 0; j < nb; ++j)
                if (!is_zero(w(i, m + j))) {
                    ok = false;
                    break;
                }
        if (ok) {
            Matrix<K> x(m, nb);
            for (size_t pc = 0; pc < m; ++pc)
                if (col_pivot[pc] >= 0)
                    for (size_t j = 0; j < nb; ++j)
                        x(pc, j) = w(static_cast<size_t>(col_pivot[pc]), m + j);
            out.particular = std::move(x);
        }
    }
    return out;
}

// Find a usable "1" for kernel vectors: any nonzero entry of the matrix
// provides the coefficient prototype (relevant for p-adics).
template <class K>
K scalar_one_of(const Matrix<K>& w, const Matrix<K>& A, size_t) {
    for (size_t i = 0; i < A.rows(); ++i)
        for (size_t j = 0; j < A.cols(); ++j)
            if (!is_zero(A(i, j))) return scalar_one(A(i, j));
    for (size_t i = 0; i < w.rows(); ++i)
        for (size_t j = 0; j < w.cols(); ++j)
            if (!is_zero(w(i, j))) return scalar_one(w(i, j));
    if constexpr (ScalarOps<K>::is_padic)
        return K{};  // no prototype in an all-zero system
    else
        return K(1);
}

template <class K>
size_t rank(const Matrix<K>& A) {
    return solve_linear(A, Matrix<K>()).rank;
}

template <class K>
std::vector<std::vector<K>> kernel_basis(const Matrix<K>& A) {
    return solve_linear(A, Matrix<K>()).kernel;
}

}  // namespace rigid
