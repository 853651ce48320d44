#include "igashape/solvers/sparse_ldlt.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include <Eigen/OrderingMethods>

#include "igashape/errors.hpp"

namespace igashape {

namespace {

using Sparse = Eigen::SparseMatrix<double>;

constexpr double kPivotTolerance = 1e-12;

std::vector<int> amd_order(const Sparse& a) {
    Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> p;
    Eigen::AMDOrdering<int> amd;
    amd(a, p);
    // p maps new -> old in Eigen's convention
    return {p.indices().data(), p.indices().data() + p.indices().size()};
}

}  // namespace

SparseLdlt::SparseLdlt(const Sparse& a, Ordering ordering) {
    if (a.rows() != a.cols()) throw ContractError("LDL^T needs a square matrix");
    n_ = static_cast<int>(a.rows());
    perm_.resize(static_cast<std::size_t>(n_));
    std::iota(perm_.begin(), perm_.end(), 0);
    if (ordering == Ordering::Amd && n_ > 0) perm_ = amd_order(a);
    factorize(a);
}

void SparseLdlt::set_trailing(const std::vector<int>& last, std::vector<int>& head_of) {
    n_last_ = static_cast<int>(last.size());
    head_of.assign(static_cast<std::size_t>(n_), 0);
    for (int i : last) {
        if (i < 0 || i >= n_ || head_of[i] != 0) throw ContractError("invalid trailing index set");
        head_of[i] = -1;
    }
}

SparseLdlt::SparseLdlt(const Sparse& a, const std::vector<int>& last, Ordering ordering) {
    if (a.rows() != a.cols()) throw ContractError("LDL^T needs a square matrix");
    n_ = static_cast<int>(a.rows());
    std::vector<int> head_of;
    set_trailing(last, head_of);
    std::vector<int> head;
    for (int i = 0; i < n_; ++i) {
        if (head_of[i] == 0) {
            head_of[i] = static_cast<int>(head.size());
            head.push_back(i);
        }
    }
    std::vector<int> order(head.size());
    std::iota(order.begin(), order.end(), 0);
    if (ordering == Ordering::Amd && !head.empty()) {
        std::vector<Eigen::Triplet<double>> trip;
        for (int j = 0; j < a.outerSize(); ++j) {
            if (head_of[j] < 0) continue;
            for (Sparse::InnerIterator it(a, j); it; ++it) {
                if (head_of[it.row()] >= 0) trip.emplace_back(head_of[it.row()], head_of[j], it.value());
            }
        }
        Sparse sub(static_cast<Eigen::Index>(head.size()), static_cast<Eigen::Index>(head.size()));
        sub.setFromTriplets(trip.begin(), trip.end());
        order = amd_order(sub);
    }
    perm_.clear();
    perm_.reserve(static_cast<std::size_t>(n_));
    for (int k : order) perm_.push_back(head[k]);
    for (int i : last) perm_.push_back(i);
    factorize(a);
}

SparseLdlt::SparseLdlt(const Sparse& a, const std::vector<int>& head, const std::vector<int>& last) {
    if (a.rows() != a.cols()) throw ContractError("LDL^T needs a square matrix");
    n_ = static_cast<int>(a.rows());
    std::vector<int> head_of;
    set_trailing(last, head_of);
    if (head.size() + last.size() != static_cast<std::size_t>(n_)) throw ContractError("ordering is not a permutation");
    for (int i : head) {
        if (i < 0 || i >= n_ || head_of[i] != 0) throw ContractError("ordering is not a permutation");
        head_of[i] = 1;
    }
    perm_ = head;
    perm_.insert(perm_.end(), last.begin(), last.end());
    factorize(a);
}

void SparseLdlt::factorize(const Sparse& a) {
    iperm_.resize(static_cast<std::size_t>(n_));
    for (int k = 0; k < n_; ++k) iperm_[perm_[k]] = k;
    // upper triangle of the permuted matrix, column major: column k holds rows i <= k
    Sparse c(n_, n_);
    {
        std::vector<int> cnt(static_cast<std::size_t>(n_), 0);
        for (int j = 0; j < a.outerSize(); ++j) {
            for (Sparse::InnerIterator it(a, j); it; ++it) {
                const int i = static_cast<int>(it.row());
                if (i > j) continue;
                ++cnt[std::max(iperm_[i], iperm_[j])];
            }
        }
        c.reserve(cnt);
        for (int j = 0; j < a.outerSize(); ++j) {
            for (Sparse::InnerIterator it(a, j); it; ++it) {
                const int i = static_cast<int>(it.row());
                if (i > j) continue;
                const int pi = iperm_[i];
                const int pj = iperm_[j];
                c.insert(std::min(pi, pj), std::max(pi, pj)) = it.value();
            }
        }
        c.makeCompressed();
    }
    const int* cp = c.outerIndexPtr();
    const int* ci = c.innerIndexPtr();
    const double* cx = c.valuePtr();

    // symbolic: elimination tree and column counts
    std::vector<int> parent(static_cast<std::size_t>(n_), -1);
    std::vector<int> flag(static_cast<std::size_t>(n_), -1);
    std::vector<int> lnz(static_cast<std::size_t>(n_), 0);
    for (int k = 0; k < n_; ++k) {
        flag[k] = k;
        for (int p = cp[k]; p < cp[k + 1]; ++p) {
            int i = ci[p];
            if (i >= k) continue;
            for (; flag[i] != k; i = parent[i]) {
                if (parent[i] == -1) parent[i] = k;
                ++lnz[i];
                flag[i] = k;
            }
        }
    }
    lp_.assign(static_cast<std::size_t>(n_) + 1, 0);
    for (int k = 0; k < n_; ++k) lp_[k + 1] = lp_[k] + lnz[k];
    li_.resize(static_cast<std::size_t>(lp_[n_]));
    lx_.resize(static_cast<std::size_t>(lp_[n_]));
    d_.resize(n_);

    // numeric
    std::vector<double> y(static_cast<std::size_t>(n_), 0.0);
    std::vector<int> pattern(static_cast<std::size_t>(n_));
    std::fill(lnz.begin(), lnz.end(), 0);
    std::fill(flag.begin(), flag.end(), -1);
    for (int k = 0; k < n_; ++k) {
        int top = n_;
        flag[k] = k;
        double akk = 0.0;
        for (int p = cp[k]; p < cp[k + 1]; ++p) {
            int i = ci[p];
            y[i] += cx[p];
            if (i == k) akk = cx[p];
            int len = 0;
            for (; flag[i] != k; i = parent[i]) {
                pattern[len++] = i;
                flag[i] = k;
            }
            while (len > 0) pattern[--top] = pattern[--len];
        }
        double dk = y[k];
        y[k] = 0.0;
        for (; top < n_; ++top) {
            const int i = pattern[top];
            const double yi = y[i];
            y[i] = 0.0;
            const int p2 = lp_[i] + lnz[i];
            for (int p = lp_[i]; p < p2; ++p) y[li_[p]] -= lx_[p] * yi;
            const double l = yi / d_(i);
            dk -= l * yi;
            li_[p2] = k;
            lx_[p2] = l;
            ++lnz[i];
        }
        if (!(dk > kPivotTolerance * std::abs(akk)) || !(akk > 0.0)) {
            std::ostringstream msg;
            msg << "non-positive pivot " << dk << " at step " << k << " of " << n_ << " (diagonal entry " << akk
                << ")";
            throw FactorizationError(msg.str());
        }
        d_(k) = dk;
    }
}

void SparseLdlt::solve_in_place(Eigen::Ref<Eigen::VectorXd> x) const {
    if (x.size() != n_) throw ContractError("right-hand side size does not match the factorization");
    Eigen::VectorXd y(n_);
    for (int k = 0; k < n_; ++k) y(k) = x(perm_[k]);
    for (int j = 0; j < n_; ++j) {
        const double yj = y(j);
        for (int p = lp_[j]; p < lp_[j + 1]; ++p) y(li_[p]) -= lx_[p] * yj;
    }
    y.array() /= d_.array();
    for (int j = n_ - 1; j >= 0; --j) {
        double s = y(j);
        for (int p = lp_[j]; p < lp_[j + 1]; ++p) s -= lx_[p] * y(li_[p]);
        y(j) = s;
    }
    for (int k = 0; k < n_; ++k) x(perm_[k]) = y(k);
}

Eigen::VectorXd SparseLdlt::solve(const Eigen::VectorXd& b) const {
    Eigen::VectorXd x = b;
    solve_in_place(x);
    return x;
}

Eigen::MatrixXd SparseLdlt::solve(const Eigen::MatrixXd& b) const {
    Eigen::MatrixXd x = b;
    for (Eigen::Index c = 0; c < x.cols(); ++c) solve_in_place(x.col(c));
    return x;
}

Eigen::VectorXd SparseLdlt::reconstruct_multiply(const Eigen::VectorXd& x) const {
    Eigen::VectorXd y(n_);
    for (int k = 0; k < n_; ++k) y(k) = x(perm_[k]);
    // L^T y
    Eigen::VectorXd t = y;
    for (int j = 0; j < n_; ++j) {
        for (int p = lp_[j]; p < lp_[j + 1]; ++p) t(j) += lx_[p] * y(li_[p]);
    }
    t.array() *= d_.array();
    // L t
    Eigen::VectorXd z = t;
    for (int j = 0; j < n_; ++j) {
        for (int p = lp_[j]; p < lp_[j + 1]; ++p) z(li_[p]) += lx_[p] * t(j);
    }
    Eigen::VectorXd out(n_);
    for (int k = 0; k < n_; ++k) out(perm_[k]) = z(k);
    return out;
}

Eigen::VectorXd SparseLdlt::schur_multiply(const Eigen::VectorXd& v) const {
    if (v.size() != n_last_) throw ContractError("vector size does not match the trailing block");
    const int off = n_ - n_last_;
    // L_tt^T v
    Eigen::VectorXd t = v;
    for (int j = off; j < n_; ++j) {
        for (int p = lp_[j]; p < lp_[j + 1]; ++p) t(j - off) += lx_[p] * v(li_[p] - off);
    }
    t.array() *= d_.tail(n_last_).array();
    Eigen::VectorXd out = t;
    for (int j = off; j < n_; ++j) {
        for (int p = lp_[j]; p < lp_[j + 1]; ++p) out(li_[p] - off) += lx_[p] * t(j - off);
    }
    return out;
}

Eigen::VectorXd SparseLdlt::schur_solve(const Eigen::VectorXd& v) const {
    if (v.size() != n_last_) throw ContractError("vector size does not match the trailing block");
    const int off = n_ - n_last_;
    Eigen::VectorXd y = v;
    for (int j = off; j < n_; ++j) {
        const double yj = y(j - off);
        for (int p = lp_[j]; p < lp_[j + 1]; ++p) y(li_[p] - off) -= lx_[p] * yj;
    }
    y.array() /= d_.tail(n_last_).array();
    for (int j = n_ - 1; j >= off; --j) {
        double s = y(j - off);
        for (int p = lp_[j]; p < lp_[j + 1]; ++p) s -= lx_[p] * y(li_[p] - off);
        y(j - off) = s;
    }
    return y;
}

std::size_t SparseLdlt::memory_bytes() const noexcept {
    return lp_.size() * sizeof(int) + li_.size() * sizeof(int) + lx_.size() * sizeof(double) +
           static_cast<std::size_t>(d_.size()) * sizeof(double) + 2 * perm_.size() * sizeof(int);
}

namespace {

void dissect(int i0, int i1, int j0, int j1, int n2, int w1, int w2, int leaf, std::vector<int>& out) {
    const int a = i1 - i0;
    const int b = j1 - j0;
    if (a <= 0 || b <= 0) return;
    const bool split_i = a - w1 >= b - w2;
    if (a * b <= leaf || (split_i ? a <= 2 * w1 : b <= 2 * w2)) {
        for (int i = i0; i < i1; ++i) {
            for (int j = j0; j < j1; ++j) out.push_back(i * n2 + j);
        }
        return;
    }
    if (split_i) {
        const int m = i0 + (a - w1) / 2;
        dissect(i0, m, j0, j1, n2, w1, w2, leaf, out);
        dissect(m + w1, i1, j0, j1, n2, w1, w2, leaf, out);
        dissect(m, m + w1, j0, j1, n2, w1, w2, a * b, out);
    } else {
        const int m = j0 + (b - w2) / 2;
        dissect(i0, i1, j0, m, n2, w1, w2, leaf, out);
        dissect(i0, i1, m + w2, j1, n2, w1, w2, leaf, out);
        dissect(i0, i1, m, m + w2, n2, w1, w2, a * b, out);
    }
}

}  // namespace

std::vector<int> grid_nested_dissection(int n1, int n2, int w1, int w2, int leaf) {
    if (n1 < 0 || n2 < 0 || w1 < 1 || w2 < 1) throw ContractError("invalid grid for nested dissection");
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(n1) * static_cast<std::size_t>(n2));
    dissect(0, n1, 0, n2, n2, w1, w2, std::max(leaf, 1), out);
    return out;
}

}  // namespace igashape
