#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace igashape {

enum class Ordering { Natural, Amd };

/// Sparse A = P^T L D L^T P for symmetric positive definite A, computed
/// row by row (up-looking) along the elimination tree. Both triangles of A
/// must be stored; only the upper one is read.
class SparseLdlt {
public:
    SparseLdlt() = default;

    /// Throws FactorizationError on a pivot d_k <= 1e-12 * A_kk (matrix not
    /// numerically positive definite) and ContractError for non-square input.
    explicit SparseLdlt(const Eigen::SparseMatrix<double>& a, Ordering ordering = Ordering::Amd);

    /// Orders the indices in `last` after all others (in the given order);
    /// the rest is ordered by `ordering`. The trailing block of the factors
    /// then represents the Schur complement onto `last`.
    SparseLdlt(const Eigen::SparseMatrix<double>& a, const std::vector<int>& last, Ordering ordering = Ordering::Amd);
    /// Same with an explicit elimination order for the other indices; `head`
    /// and `last` together must be a permutation of 0..n-1.
    SparseLdlt(const Eigen::SparseMatrix<double>& a, const std::vector<int>& head, const std::vector<int>& last);

    int rows() const noexcept { return n_; }

    Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
    /// Column-wise solve.
    Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const;
    void solve_in_place(Eigen::Ref<Eigen::VectorXd> x) const;

    /// (A_ll - A_lo A_oo^{-1} A_ol) v for v indexed like `last`.
    Eigen::VectorXd schur_multiply(const Eigen::VectorXd& v) const;
    /// (A^{-1})_ll v = (A_ll - A_lo A_oo^{-1} A_ol)^{-1} v, touching only the
    /// trailing block of the factors.
    Eigen::VectorXd schur_solve(const Eigen::VectorXd& v) const;
    int trailing_size() const noexcept { return n_last_; }

    /// P^T L D L^T P x, for checking the factors.
    Eigen::VectorXd reconstruct_multiply(const Eigen::VectorXd& x) const;

    std::size_t factor_nonzeros() const noexcept { return li_.size(); }
    /// Bytes held by L, D and the permutation.
    std::size_t memory_bytes() const noexcept;

    const Eigen::VectorXd& diagonal() const noexcept { return d_; }

private:
    void set_trailing(const std::vector<int>& last, std::vector<int>& head_of);
    void factorize(const Eigen::SparseMatrix<double>& a);

    int n_ = 0;
    int n_last_ = 0;
    std::vector<int> perm_;   // new index -> old index
    std::vector<int> iperm_;  // old index -> new index
    std::vector<int> lp_;     // column pointers of L (strictly lower)
    std::vector<int> li_;
    std::vector<double> lx_;
    Eigen::VectorXd d_;
};

/// Nested dissection of an n1 x n2 grid numbered i * n2 + j, where entries
/// couple when |di| <= w1 and |dj| <= w2. Separators are w1 or w2 lines wide
/// and follow both halves; boxes with at most `leaf` entries stay natural.
std::vector<int> grid_nested_dissection(int n1, int n2, int w1, int w2, int leaf = 64);

}  // namespace igashape
