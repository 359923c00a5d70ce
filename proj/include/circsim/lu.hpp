#pragma once

// Dense LU factorization with partial (row) pivoting, P A = L U.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "circsim/error.hpp"

namespace circsim {

/// Thrown when a pivot falls below the tolerance; `column` is the unknown
/// whose elimination failed.
class SingularMatrix : public Error {
public:
    SingularMatrix(Eigen::Index column, double pivot)
        : Error(ErrorCode::Singular, "singular matrix at unknown " + std::to_string(column) + " (pivot " +
                                         std::to_string(pivot) + ")"),
          column_(column) {}

    [[nodiscard]] Eigen::Index column() const noexcept { return column_; }

private:
    Eigen::Index column_;
};

inline constexpr double kDefaultPivotTolerance = 1e-13;

template <typename Scalar>
class DenseLu {
public:
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    /// Factorizes `a`; throws SingularMatrix if any |pivot| < tolerance.
    template <typename Derived>
    explicit DenseLu(const Eigen::MatrixBase<Derived>& a, Scalar tolerance = Scalar(kDefaultPivotTolerance))
        : lu_(a), perm_(static_cast<std::size_t>(a.rows())) {
        eigen_assert(a.rows() == a.cols());
        const Eigen::Index n = lu_.rows();
        for (Eigen::Index i = 0; i < n; ++i) perm_[static_cast<std::size_t>(i)] = i;

        for (Eigen::Index k = 0; k < n; ++k) {
            Eigen::Index pivot_row = k;
            lu_.col(k).tail(n - k).cwiseAbs().maxCoeff(&pivot_row);
            pivot_row += k;
            const Scalar pivot = lu_(pivot_row, k);
            if (!(std::abs(pivot) >= tolerance)) throw SingularMatrix(k, static_cast<double>(pivot));
            if (pivot_row != k) {
                lu_.row(k).swap(lu_.row(pivot_row));
                std::swap(perm_[static_cast<std::size_t>(k)], perm_[static_cast<std::size_t>(pivot_row)]);
            }
            const Eigen::Index rest = n - k - 1;
            if (rest == 0) continue;
            lu_.col(k).tail(rest) /= lu_(k, k);
            lu_.bottomRightCorner(rest, rest).noalias() -= lu_.col(k).tail(rest) * lu_.row(k).tail(rest);
        }
    }

    template <typename Rhs>
    [[nodiscard]] Vector solve(const Eigen::MatrixBase<Rhs>& b) const {
        const Eigen::Index n = lu_.rows();
        Vector x(n);
        for (Eigen::Index i = 0; i < n; ++i) x[i] = b[perm_[static_cast<std::size_t>(i)]];
        lu_.template triangularView<Eigen::UnitLower>().solveInPlace(x);
        lu_.template triangularView<Eigen::Upper>().solveInPlace(x);
        return x;
    }

    /// Packed factors: strictly-lower part is L (unit diagonal), upper part is U.
    [[nodiscard]] const Matrix& packed() const noexcept { return lu_; }
    /// Row i of P A is row permutation()[i] of A.
    [[nodiscard]] const std::vector<Eigen::Index>& permutation() const noexcept { return perm_; }

private:
    Matrix lu_;
    std::vector<Eigen::Index> perm_;
};

template <typename Derived, typename Rhs>
[[nodiscard]] auto lu_solve(const Eigen::MatrixBase<Derived>& a, const Eigen::MatrixBase<Rhs>& b,
                            typename Derived::Scalar tolerance = typename Derived::Scalar(kDefaultPivotTolerance)) {
    return DenseLu<typename Derived::Scalar>(a, tolerance).solve(b);
}

}  // namespace circsim
