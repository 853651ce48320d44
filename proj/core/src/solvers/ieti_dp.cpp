#include "igashape/solvers/ieti_dp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "igashape/errors.hpp"
#include "igashape/solvers/direct.hpp"

namespace igashape {

namespace {

using Triplet = Eigen::Triplet<double>;

void run(WorkerPool* pool, int n, const std::function<void(int)>& f) {
    if (pool != nullptr && pool->size() > 1) {
        pool->parallel_for(n, f);
    } else {
        for (int i = 0; i < n; ++i) f(i);
    }
}

struct JumpEntry {
    int row = 0;         // dual index
    int r = 0;           // index in the subdomain's R numbering
    double sign = 0.0;   // +1 or -1
    double scaled = 0.0; // sign times the neighbour's weight
};

struct Subdomain {
    std::vector<int> dofs;        // free indices, sorted
    std::vector<int> r_free;      // free index of each R dof
    std::vector<double> r_weight; // 1 / multiplicity of each R dof
    std::vector<int> pi_global;   // coarse index of each local primal dof
    SparseMatrix krp;             // R x primal
    SparseLdlt krr;               // dual dofs ordered last, by dual index
    Eigen::MatrixXd phi;          // K_RR^{-1} K_RPi
    Eigen::MatrixXd phi_dual;     // rows of phi at the dual dofs
    Eigen::MatrixXd coarse;       // K_PiPi - K_PiR phi
    std::vector<JumpEntry> jump;  // one per dual dof of the subdomain, by dual index
    std::vector<double> dual_diag;

    std::size_t bytes() const {
        return krr.memory_bytes() + static_cast<std::size_t>(krp.nonZeros()) * (sizeof(double) + sizeof(int)) +
               static_cast<std::size_t>(phi.size() + phi_dual.size()) * sizeof(double) + jump.size() * sizeof(JumpEntry) +
               (r_free.size() + pi_global.size()) * sizeof(int) + r_weight.size() * sizeof(double);
    }
};

}  // namespace

struct IetiDpOperator::Impl {
    const SparseMatrix* global = nullptr;
    int n_free = 0;
    std::vector<Subdomain> subs;
    std::vector<int> primal;
    std::vector<int> dual;
    std::vector<std::pair<int, int>> pairs;
    Eigen::LLT<Eigen::MatrixXd> coarse;
    double setup_seconds = 0.0;
    std::size_t bytes = 0;

    // y_s <- K_RR^{-1} r_s, u_pi from the coarse problem, y_s -= phi u_pi
    void apply_ktilde(std::vector<Eigen::VectorXd>& r, const Eigen::VectorXd& f_pi, Eigen::VectorXd& u_pi,
                      WorkerPool* pool) const {
        const int ns = static_cast<int>(subs.size());
        std::vector<Eigen::VectorXd> c(static_cast<std::size_t>(ns));
        run(pool, ns, [&](int s) {
            const Subdomain& sd = subs[s];
            sd.krr.solve_in_place(r[s]);
            if (!sd.pi_global.empty()) c[s] = sd.krp.transpose() * r[s];
        });
        u_pi = f_pi;
        for (int s = 0; s < ns; ++s) {
            for (std::size_t k = 0; k < subs[s].pi_global.size(); ++k) u_pi(subs[s].pi_global[k]) -= c[s](k);
        }
        if (u_pi.size() > 0) u_pi = coarse.solve(u_pi);
        run(pool, ns, [&](int s) {
            const Subdomain& sd = subs[s];
            if (sd.pi_global.empty()) return;
            Eigen::VectorXd loc(static_cast<Eigen::Index>(sd.pi_global.size()));
            for (std::size_t k = 0; k < sd.pi_global.size(); ++k) loc(k) = u_pi(sd.pi_global[k]);
            r[s].noalias() -= sd.phi * loc;
        });
    }

    std::vector<Eigen::VectorXd> jump_transpose(const Eigen::VectorXd& lambda, WorkerPool* pool) const {
        std::vector<Eigen::VectorXd> r(subs.size());
        run(pool, static_cast<int>(subs.size()), [&](int s) {
            r[s] = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(subs[s].r_free.size()));
            for (const auto& e : subs[s].jump) r[s](e.r) = e.sign * lambda(e.row);
        });
        return r;
    }

    Eigen::VectorXd jump(const std::vector<Eigen::VectorXd>& u) const {
        Eigen::VectorXd q = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dual.size()));
        for (std::size_t s = 0; s < subs.size(); ++s) {
            for (const auto& e : subs[s].jump) q(e.row) += e.sign * u[s](e.r);
        }
        return q;
    }

    // B K~^{-1} B^T lambda needs only the dual rows: (K_RR^{-1})_dd is the
    // inverse Schur complement and K_PiR K_RR^{-1} B^T = phi_dual^T
    Eigen::VectorXd apply_f(const Eigen::VectorXd& lambda, WorkerPool* pool) const {
        const int ns = static_cast<int>(subs.size());
        std::vector<Eigen::VectorXd> w(static_cast<std::size_t>(ns));
        std::vector<Eigen::VectorXd> c(static_cast<std::size_t>(ns));
        run(pool, ns, [&](int s) {
            const Subdomain& sd = subs[s];
            Eigen::VectorXd v(static_cast<Eigen::Index>(sd.jump.size()));
            for (std::size_t t = 0; t < sd.jump.size(); ++t) v(t) = sd.jump[t].sign * lambda(sd.jump[t].row);
            if (!sd.pi_global.empty()) c[s] = sd.phi_dual.transpose() * v;
            w[s] = sd.krr.schur_solve(v);
        });
        Eigen::VectorXd u_pi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(primal.size()));
        for (int s = 0; s < ns; ++s) {
            for (std::size_t k = 0; k < subs[s].pi_global.size(); ++k) u_pi(subs[s].pi_global[k]) -= c[s](k);
        }
        if (u_pi.size() > 0) u_pi = coarse.solve(u_pi);
        Eigen::VectorXd q = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dual.size()));
        for (int s = 0; s < ns; ++s) {
            const Subdomain& sd = subs[s];
            if (!sd.pi_global.empty()) {
                Eigen::VectorXd loc(static_cast<Eigen::Index>(sd.pi_global.size()));
                for (std::size_t k = 0; k < sd.pi_global.size(); ++k) loc(k) = u_pi(sd.pi_global[k]);
                w[s].noalias() -= sd.phi_dual * loc;
            }
            for (std::size_t t = 0; t < sd.jump.size(); ++t) q(sd.jump[t].row) += sd.jump[t].sign * w[s](t);
        }
        return q;
    }

    Eigen::VectorXd apply_preconditioner(const Eigen::VectorXd& v, WorkerPool* pool) const {
        const int ns = static_cast<int>(subs.size());
        std::vector<Eigen::VectorXd> out(static_cast<std::size_t>(ns));
        run(pool, ns, [&](int s) {
            const Subdomain& sd = subs[s];
            Eigen::VectorXd w(static_cast<Eigen::Index>(sd.jump.size()));
            for (std::size_t t = 0; t < sd.jump.size(); ++t) w(t) = sd.jump[t].scaled * v(sd.jump[t].row);
            out[s] = sd.krr.schur_multiply(w);
        });
        Eigen::VectorXd z = Eigen::VectorXd::Zero(v.size());
        for (int s = 0; s < ns; ++s) {
            const auto& jmp = subs[s].jump;
            for (std::size_t t = 0; t < jmp.size(); ++t) z(jmp[t].row) += jmp[t].scaled * out[s](t);
        }
        return z;
    }

    // u = K~^{-1}(f - B^T lambda), assembled onto the free dofs; the jump of
    // the local pieces is the true dual residual d - F lambda
    Eigen::VectorXd recover(const Eigen::VectorXd& b, const Eigen::VectorXd& lambda, WorkerPool* pool,
                            Eigen::VectorXd* residual) const {
        auto r = jump_transpose(lambda, pool);
        run(pool, static_cast<int>(subs.size()), [&](int s) {
            const Subdomain& sd = subs[s];
            for (std::size_t k = 0; k < sd.r_free.size(); ++k) {
                r[s](k) = sd.r_weight[k] * b(sd.r_free[k]) - r[s](k);
            }
        });
        Eigen::VectorXd f_pi(static_cast<Eigen::Index>(primal.size()));
        for (std::size_t k = 0; k < primal.size(); ++k) f_pi(k) = b(primal[k]);
        Eigen::VectorXd u_pi;
        apply_ktilde(r, f_pi, u_pi, pool);
        Eigen::VectorXd x = Eigen::VectorXd::Zero(n_free);
        for (std::size_t s = 0; s < subs.size(); ++s) {
            const Subdomain& sd = subs[s];
            for (std::size_t k = 0; k < sd.r_free.size(); ++k) x(sd.r_free[k]) += sd.r_weight[k] * r[s](k);
        }
        for (std::size_t k = 0; k < primal.size(); ++k) x(primal[k]) = u_pi(k);
        if (residual != nullptr) *residual = jump(r);
        return x;
    }
};

IetiDpOperator::~IetiDpOperator() = default;
IetiDpOperator::IetiDpOperator(IetiDpOperator&&) noexcept = default;

int IetiDpOperator::subdomain_count() const { return static_cast<int>(impl_->subs.size()); }
int IetiDpOperator::size() const { return impl_->n_free; }
const std::vector<int>& IetiDpOperator::primal_dofs() const { return impl_->primal; }
const std::vector<int>& IetiDpOperator::dual_dofs() const { return impl_->dual; }
const std::vector<std::pair<int, int>>& IetiDpOperator::dual_pairs() const { return impl_->pairs; }
double IetiDpOperator::setup_seconds() const { return impl_->setup_seconds; }
std::size_t IetiDpOperator::memory_bytes() const { return impl_->bytes; }

IetiDpOperator::IetiDpOperator(const SparseSymmetricSystem& system, const MultiPatchDomain& domain,
                               const GlobalDofMap& dof_map, const Partition& partition, IetiScaling scaling,
                               WorkerPool* pool)
    : impl_(std::make_unique<Impl>()) {
    Stopwatch clock;
    validate_partition(domain, partition);
    if (static_cast<int>(system.patch_blocks.size()) != domain.patch_count() ||
        system.size() != dof_map.free_count()) {
        throw ContractError("system does not match the domain and dof map");
    }
    Impl& im = *impl_;
    im.global = &system.matrix;
    im.n_free = dof_map.free_count();
    const int nf = im.n_free;
    const int ns = partition.size();
    const std::vector<int> owner = partition.owner(domain.patch_count());

    // multiplicity and first/second subdomain of each free dof
    std::vector<int> mult(static_cast<std::size_t>(nf), 0);
    std::vector<int> first(static_cast<std::size_t>(nf), -1);
    std::vector<int> second(static_cast<std::size_t>(nf), -1);
    std::vector<char> has_dirichlet(static_cast<std::size_t>(ns), 0);
    for (int s = 0; s < ns; ++s) {
        for (int p : partition.subdomains[s]) {
            for (int g : dof_map.patch_dofs(p)) {
                const int f = dof_map.free_index(g);
                if (f < 0) {
                    has_dirichlet[s] = 1;
                    continue;
                }
                if (first[f] == s || second[f] == s) continue;
                if (first[f] < 0) {
                    first[f] = s;
                } else if (second[f] < 0) {
                    second[f] = s;
                }
                ++mult[f];
            }
        }
    }
    auto corners = [&](int p) {
        const Patch& patch = domain.patch(p);
        const int nu = patch.basis().size_u();
        const int nv = patch.basis().size_v();
        std::vector<int> out;
        for (int k : {0, nv - 1, (nu - 1) * nv, nu * nv - 1}) {
            const int f = dof_map.free_index(p, k);
            if (f >= 0) out.push_back(f);
        }
        return out;
    };
    std::vector<int> cut(static_cast<std::size_t>(nf), 0);
    for (const auto& itf : domain.interfaces()) {
        if (owner[itf.a.patch] == owner[itf.b.patch]) continue;
        const auto idx = domain.patch(itf.a.patch).side_indices(itf.a.side);
        for (int k : {idx.front(), idx.back()}) {
            const int f = dof_map.free_index(itf.a.patch, k);
            if (f >= 0) ++cut[f];
        }
    }
    std::vector<char> is_primal(static_cast<std::size_t>(nf), 0);
    for (int p = 0; p < domain.patch_count(); ++p) {
        for (int f : corners(p)) {
            if (mult[f] >= 3 || (mult[f] == 2 && cut[f] != 2)) is_primal[f] = 1;
        }
    }
    for (int s = 0; s < ns; ++s) {
        if (has_dirichlet[s]) continue;
        bool any = false;
        for (int p : partition.subdomains[s]) {
            for (int g : dof_map.patch_dofs(p)) {
                const int f = dof_map.free_index(g);
                if (f >= 0 && is_primal[f]) any = true;
            }
        }
        if (any) continue;
        for (int p : partition.subdomains[s]) {
            for (int f : corners(p)) {
                if (mult[f] >= 2) is_primal[f] = 1;
            }
        }
    }
    std::vector<int> primal_index(static_cast<std::size_t>(nf), -1);
    std::vector<int> dual_index(static_cast<std::size_t>(nf), -1);
    for (int f = 0; f < nf; ++f) {
        if (is_primal[f]) {
            primal_index[f] = static_cast<int>(im.primal.size());
            im.primal.push_back(f);
        } else if (mult[f] >= 2) {
            if (mult[f] > 2) {
                std::ostringstream msg;
                msg << "interface dof " << f << " is shared by " << mult[f] << " subdomains but is not primal";
                throw SolverError(msg.str());
            }
            dual_index[f] = static_cast<int>(im.dual.size());
            im.dual.push_back(f);
            im.pairs.emplace_back(first[f], second[f]);
        }
    }

    im.subs.resize(static_cast<std::size_t>(ns));
    run(pool, ns, [&](int s) {
        Subdomain& sd = im.subs[s];
        for (int p : partition.subdomains[s]) {
            for (int g : dof_map.patch_dofs(p)) {
                const int f = dof_map.free_index(g);
                if (f >= 0) sd.dofs.push_back(f);
            }
        }
        std::sort(sd.dofs.begin(), sd.dofs.end());
        sd.dofs.erase(std::unique(sd.dofs.begin(), sd.dofs.end()), sd.dofs.end());
        const int n = static_cast<int>(sd.dofs.size());
        auto local = [&](int f) {
            return static_cast<int>(std::lower_bound(sd.dofs.begin(), sd.dofs.end(), f) - sd.dofs.begin());
        };
        // local numbering split into R and primal
        std::vector<int> r_of(static_cast<std::size_t>(n), -1);
        std::vector<int> pi_of(static_cast<std::size_t>(n), -1);
        for (int k = 0; k < n; ++k) {
            const int f = sd.dofs[k];
            if (is_primal[f]) {
                pi_of[k] = static_cast<int>(sd.pi_global.size());
                sd.pi_global.push_back(primal_index[f]);
            } else {
                r_of[k] = static_cast<int>(sd.r_free.size());
                sd.r_free.push_back(f);
                sd.r_weight.push_back(1.0 / mult[f]);
            }
        }
        const int nr = static_cast<int>(sd.r_free.size());
        const int np = static_cast<int>(sd.pi_global.size());
        std::vector<Triplet> trr;
        std::vector<Triplet> trp;
        sd.coarse = Eigen::MatrixXd::Zero(np, np);
        for (int p : partition.subdomains[s]) {
            const auto& l2g = dof_map.patch_dofs(p);
            const SparseMatrix& blk = system.patch_blocks[p];
            for (int c = 0; c < blk.outerSize(); ++c) {
                const int fc = dof_map.free_index(l2g[c]);
                if (fc < 0) continue;
                const int lc = local(fc);
                for (SparseMatrix::InnerIterator it(blk, c); it; ++it) {
                    const int fr = dof_map.free_index(l2g[it.row()]);
                    if (fr < 0) continue;
                    const int lr = local(fr);
                    if (r_of[lr] >= 0 && r_of[lc] >= 0) {
                        trr.emplace_back(r_of[lr], r_of[lc], it.value());
                    } else if (r_of[lr] >= 0) {
                        trp.emplace_back(r_of[lr], pi_of[lc], it.value());
                    } else if (r_of[lc] < 0) {
                        sd.coarse(pi_of[lr], pi_of[lc]) += it.value();
                    }
                }
            }
        }
        SparseMatrix krr(nr, nr);
        krr.setFromTriplets(trr.begin(), trr.end());
        sd.krp.resize(nr, np);
        sd.krp.setFromTriplets(trp.begin(), trp.end());
        sd.krp.makeCompressed();

        // dual dofs of this subdomain, by dual index
        std::vector<std::pair<int, int>> duals;
        for (int k = 0; k < nr; ++k) {
            const int di = dual_index[sd.r_free[k]];
            if (di >= 0) duals.emplace_back(di, k);
        }
        std::sort(duals.begin(), duals.end());
        std::vector<int> last;
        for (const auto& [di, k] : duals) {
            last.push_back(k);
            JumpEntry e;
            e.row = di;
            e.r = k;
            e.sign = im.pairs[di].first == s ? 1.0 : -1.0;
            sd.jump.push_back(e);
            sd.dual_diag.push_back(krr.coeff(k, k));
        }
        try {
            if (partition.subdomains[s].size() == 1) {
                // patch subdomain: dissect its tensor grid, dual dofs last
                const int p = partition.subdomains[s].front();
                const TensorBasis2D& basis = domain.patch(p).basis();
                std::vector<char> trailing(static_cast<std::size_t>(nr), 0);
                for (int k : last) trailing[k] = 1;
                std::vector<int> head;
                head.reserve(static_cast<std::size_t>(nr) - last.size());
                for (int k : grid_nested_dissection(basis.size_u(), basis.size_v(), basis.u.degree(),
                                                    basis.v.degree())) {
                    const int f = dof_map.free_index(p, k);
                    if (f < 0) continue;
                    const int r = r_of[local(f)];
                    if (r >= 0 && !trailing[r]) head.push_back(r);
                }
                sd.krr = SparseLdlt(krr, head, last);
            } else {
                sd.krr = SparseLdlt(krr, last);
            }
        } catch (const FactorizationError& e) {
            std::ostringstream msg;
            msg << "subdomain " << s << ": local problem is singular after primal pinning (" << e.what() << ")";
            throw SolverError(msg.str());
        }
        if (np > 0) {
            sd.phi = sd.krr.solve(Eigen::MatrixXd(sd.krp));
            sd.phi_dual.resize(static_cast<Eigen::Index>(last.size()), np);
            for (std::size_t t = 0; t < last.size(); ++t) sd.phi_dual.row(t) = sd.phi.row(last[t]);
            sd.coarse.noalias() -= sd.krp.transpose() * sd.phi;
        }
    });

    // scaling weights need the neighbour's diagonal
    std::vector<double> diag_first(im.dual.size(), 0.0);
    std::vector<double> diag_second(im.dual.size(), 0.0);
    for (int s = 0; s < ns; ++s) {
        const Subdomain& sd = im.subs[s];
        for (std::size_t t = 0; t < sd.jump.size(); ++t) {
            (sd.jump[t].sign > 0 ? diag_first : diag_second)[sd.jump[t].row] = sd.dual_diag[t];
        }
    }
    for (int s = 0; s < ns; ++s) {
        Subdomain& sd = im.subs[s];
        for (auto& e : sd.jump) {
            double w = 0.5;
            if (scaling == IetiScaling::Coefficient) {
                const double own = e.sign > 0 ? diag_first[e.row] : diag_second[e.row];
                const double other = e.sign > 0 ? diag_second[e.row] : diag_first[e.row];
                w = other / (own + other);
            }
            e.scaled = e.sign * w;
        }
        sd.dual_diag.clear();
        sd.dual_diag.shrink_to_fit();
    }

    const int npi = static_cast<int>(im.primal.size());
    if (npi > 0) {
        Eigen::MatrixXd s_pp = Eigen::MatrixXd::Zero(npi, npi);
        for (const auto& sd : im.subs) {
            const int m = static_cast<int>(sd.pi_global.size());
            for (int j = 0; j < m; ++j) {
                for (int i = 0; i < m; ++i) s_pp(sd.pi_global[i], sd.pi_global[j]) += sd.coarse(i, j);
            }
        }
        for (auto& sd : im.subs) sd.coarse.resize(0, 0);
        s_pp = 0.5 * (s_pp + s_pp.transpose()).eval();
        im.coarse.compute(s_pp);
        if (im.coarse.info() != Eigen::Success) throw SolverError("coarse primal problem is not positive definite");
    }

    im.bytes = static_cast<std::size_t>(npi) * static_cast<std::size_t>(npi) * sizeof(double) +
               (im.primal.size() + im.dual.size() + 2 * im.pairs.size()) * sizeof(int);
    for (const auto& sd : im.subs) im.bytes += sd.bytes();
    im.setup_seconds = clock.seconds();
}

Eigen::VectorXd IetiDpOperator::solve_without_multipliers(const Eigen::VectorXd& rhs) const {
    if (rhs.size() != impl_->n_free) throw ContractError("right-hand side size does not match the operator");
    return impl_->recover(rhs, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(impl_->dual.size())), nullptr,
                          nullptr);
}

Eigen::VectorXd IetiDpOperator::apply_dual(const Eigen::VectorXd& lambda) const {
    if (lambda.size() != static_cast<Eigen::Index>(impl_->dual.size())) {
        throw ContractError("multiplier size does not match the dual space");
    }
    return impl_->apply_f(lambda, nullptr);
}

SolveResult IetiDpOperator::solve(const Eigen::VectorXd& b, double tol, int max_iterations, WorkerPool* pool,
                                  const IterateObserver& observer) const {
    const Impl& im = *impl_;
    if (b.size() != im.n_free) throw ContractError("right-hand side size does not match the operator");
    if (!(tol > 0.0)) throw ConfigurationError("solver tolerance must be positive");
    Stopwatch clock;
    SolveResult out;
    out.log.setup_seconds = im.setup_seconds;
    out.log.memory_bytes = im.bytes;
    out.log.workers = pool != nullptr ? pool->size() : 1;
    const Eigen::Index nd = static_cast<Eigen::Index>(im.dual.size());
    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(nd);
    Eigen::VectorXd x;

    if (nd > 0) {
        // d = B K~^{-1} f
        Eigen::VectorXd r;
        {
            std::vector<Eigen::VectorXd> rr(im.subs.size());
            run(pool, static_cast<int>(im.subs.size()), [&](int s) {
                const Subdomain& sd = im.subs[s];
                rr[s].resize(static_cast<Eigen::Index>(sd.r_free.size()));
                for (std::size_t k = 0; k < sd.r_free.size(); ++k) rr[s](k) = sd.r_weight[k] * b(sd.r_free[k]);
            });
            Eigen::VectorXd f_pi(static_cast<Eigen::Index>(im.primal.size()));
            for (std::size_t k = 0; k < im.primal.size(); ++k) f_pi(k) = b(im.primal[k]);
            Eigen::VectorXd u_pi;
            im.apply_ktilde(rr, f_pi, u_pi, pool);
            r = im.jump(rr);
        }
        const double d_norm = r.norm();
        if (d_norm > 0.0) {
            double tol_eff = tol;
            double last_global = std::numeric_limits<double>::infinity();
            Eigen::VectorXd z = im.apply_preconditioner(r, pool);
            double rz = r.dot(z);
            Eigen::VectorXd p = z;
            bool converged = false;
            while (out.log.iterations < max_iterations) {
                if (!(rz > 0.0)) {
                    std::ostringstream msg;
                    msg << "preconditioned residual r^T z = " << rz << " is not positive at iteration "
                        << out.log.iterations << " (||r|| / ||d|| = " << r.norm() / d_norm << ")";
                    throw SolverError(msg.str());
                }
                const Eigen::VectorXd q = im.apply_f(p, pool);
                const double pq = p.dot(q);
                if (!(pq > 0.0)) {
                    std::ostringstream msg;
                    msg << "dual operator is not positive along the search direction (p^T F p = " << pq
                        << ") at iteration " << out.log.iterations;
                    throw SolverError(msg.str());
                }
                const double alpha = rz / pq;
                lambda += alpha * p;
                r -= alpha * q;
                ++out.log.iterations;
                if (observer) observer(out.log.iterations, lambda);
                double rel = r.norm() / d_norm;
                if (rel <= tol_eff) {
                    // the recursive residual drifts; replace it by the true one
                    x = im.recover(b, lambda, pool, &r);
                    rel = r.norm() / d_norm;
                    const double global_rel = relative_residual(*im.global, x, b);
                    // a global residual that stalls below the dual tolerance is at its floor
                    if ((rel <= tol && (global_rel <= tol || global_rel > 0.5 * last_global)) || tol_eff < 1e-15) {
                        out.log.residuals.push_back(rel);
                        converged = true;
                        break;
                    }
                    if (rel <= tol) last_global = global_rel;
                    tol_eff *= 0.1;
                }
                out.log.residuals.push_back(rel);
                z = im.apply_preconditioner(r, pool);
                const double rz_new = r.dot(z);
                p = z + (rz_new / rz) * p;
                rz = rz_new;
            }
            if (!converged) {
                std::ostringstream msg;
                msg << "IETI-DP PCG did not reach tolerance " << tol << " in " << max_iterations
                    << " iterations (last relative residual "
                    << (out.log.residuals.empty() ? 1.0 : out.log.residuals.back()) << ")";
                throw ConvergenceError(msg.str(), out.log.residuals);
            }
            out.log.interface_jump = r.lpNorm<Eigen::Infinity>();
        }
    }
    if (x.size() == 0) {
        Eigen::VectorXd jumps;
        x = im.recover(b, lambda, pool, &jumps);
        out.log.interface_jump = jumps.size() > 0 ? jumps.lpNorm<Eigen::Infinity>() : 0.0;
    }
    out.x = std::move(x);
    out.log.solve_seconds = clock.seconds();
    out.log.relative_residual = relative_residual(*im.global, out.x, b);
    return out;
}

IetiDpOperator ieti_setup(const SparseSymmetricSystem& system, const MultiPatchDomain& domain,
                          const GlobalDofMap& dof_map, const Partition& partition, IetiScaling scaling) {
    return IetiDpOperator(system, domain, dof_map, partition, scaling, nullptr);
}

SolveResult ieti_solve(const IetiDpOperator& op, const Eigen::VectorXd& rhs, double tol, int max_iterations) {
    return op.solve(rhs, tol, max_iterations, nullptr);
}

SolveResult solve_parallel(const IetiDpOperator& op, const Eigen::VectorXd& rhs, double tol, int n_workers,
                           int max_iterations) {
    WorkerPool pool(n_workers);
    return op.solve(rhs, tol, max_iterations, &pool);
}

}  // namespace igashape
