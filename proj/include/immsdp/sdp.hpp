#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "affine.hpp"

// Small dense semidefinite programs in LMI form:
//
//     opt  c^T x   s.t.   B_j(x) = F0_j + sum_k x_k Fk_j  >= 0,   E x = f.
//
// Hermitian blocks are handled through the real symmetric embedding
// [[Re H, -Im H], [Im H, Re H]]. Equalities are eliminated by Gauss-Jordan
// substitution before the cone iteration. The cone problem is solved by an
// infeasible-start primal-dual path-following method with the HKM direction
// and a Mehrotra predictor-corrector step.

namespace immsdp {

inline Eigen::MatrixXd embed_hermitian(const Eigen::MatrixXcd& H) {
    const Eigen::Index n = H.rows();
    if (H.cols() != n) throw std::invalid_argument("embed_hermitian: not square");
    if ((H - H.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
        throw std::invalid_argument("embed_hermitian: input is not Hermitian");
    Eigen::MatrixXd M(2 * n, 2 * n);
    M.topLeftCorner(n, n) = H.real();
    M.bottomRightCorner(n, n) = H.real();
    M.topRightCorner(n, n) = -H.imag();
    M.bottomLeftCorner(n, n) = H.imag();
    return 0.5 * (M + M.transpose());
}

struct SdpBlock {
    int n = 0;                  // complex dimension
    Eigen::MatrixXcd F0;        // constant part
    // per-variable Hermitian coefficient matrices, sparse triplets
    std::map<int, std::vector<std::tuple<int, int, Complex>>> coeffs;

    void add(int var, int i, int j, Complex v) { coeffs[var].emplace_back(i, j, v); }

    // Builds a block from a symbolic Hermitian matrix of affine entries.
    static SdpBlock from_entries(const std::vector<std::vector<ComplexAffine>>& entries) {
        SdpBlock b;
        b.n = static_cast<int>(entries.size());
        b.F0 = Eigen::MatrixXcd::Zero(b.n, b.n);
        for (int i = 0; i < b.n; ++i) {
            for (int j = 0; j < b.n; ++j) {
                ComplexAffine e = entries[i][j];
                e.compress(0.0);
                b.F0(i, j) = e.constant;
                for (const auto& [v, c] : e.terms) b.add(v, i, j, c);
            }
        }
        return b;
    }

    Eigen::MatrixXcd evaluate(const Eigen::VectorXd& x) const {
        Eigen::MatrixXcd M = F0;
        for (const auto& [v, trips] : coeffs)
            for (const auto& [i, j, val] : trips) M(i, j) += val * x[v];
        return M;
    }
};

enum class SdpStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

inline const char* to_string(SdpStatus s) {
    switch (s) {
        case SdpStatus::Optimal: return "optimal";
        case SdpStatus::Infeasible: return "infeasible";
        case SdpStatus::Unbounded: return "unbounded";
        default: return "numerical-failure";
    }
}

struct SdpProblem {
    int num_vars = 0;
    RealAffine objective;
    bool maximize = true;
    std::vector<SdpBlock> blocks;
    std::vector<LinearConstraint> equalities;
};

struct SdpSolution {
    SdpStatus status = SdpStatus::NumericalFailure;
    double value = 0.0;
    Eigen::VectorXd x;
    double gap = std::numeric_limits<double>::infinity();
    double max_violation = std::numeric_limits<double>::infinity();
    int iterations = 0;
};

namespace detail {

struct Elimination {
    bool consistent = true;
    std::vector<int> free_vars;                       // z index -> x index
    Eigen::VectorXd x_particular;                     // length m
    // pivot substitutions: x_pivot = shift + sum_f coeff * z_f
    std::vector<int> pivot_vars;
    std::vector<std::map<int, double>> pivot_rows;    // keyed by x-index of free var
    std::vector<double> pivot_shift;
};

// Gauss-Jordan elimination of E x = f, keeping sparse substitution rows.
inline Elimination eliminate_equalities(int m, const std::vector<LinearConstraint>& eqs) {
    Elimination el;
    std::vector<std::map<int, double>> rows;
    std::vector<double> rhs;
    std::vector<int> pivot_col;
    for (const LinearConstraint& c : eqs) {
        std::map<int, double> row(c.terms.begin(), c.terms.end());
        double r = c.rhs;
        // substitute previously pivoted variables
        for (std::size_t p = 0; p < rows.size(); ++p) {
            auto it = row.find(pivot_col[p]);
            if (it == row.end()) continue;
            double w = it->second;
            row.erase(it);
            for (const auto& [v, cv] : rows[p]) row[v] -= w * cv;
            r -= w * rhs[p];
        }
        // pick the largest remaining coefficient as pivot
        int piv = -1;
        double best = 0.0, scale = 0.0;
        for (const auto& [v, cv] : row) scale = std::max(scale, std::abs(cv));
        for (const auto& [v, cv] : row)
            if (std::abs(cv) > best) { best = std::abs(cv); piv = v; }
        if (piv < 0 || best <= 1e-11 * std::max(1.0, scale) || best <= 1e-13) {
            if (std::abs(r) > 1e-9) el.consistent = false;  // 0 = nonzero
            continue;
        }
        double w = row[piv];
        row.erase(piv);
        for (auto& [v, cv] : row) cv /= w;
        r /= w;
        // Stored form: x_piv = r - row . x. Substitute the new pivot out of
        // the earlier rows so substitutions reference free variables only.
        for (std::size_t p = 0; p < rows.size(); ++p) {
            auto it = rows[p].find(piv);
            if (it == rows[p].end()) continue;
            double wp = it->second;
            rows[p].erase(it);
            rhs[p] -= wp * r;
            for (const auto& [v, cv] : row) rows[p][v] -= wp * cv;
            std::erase_if(rows[p], [](const auto& t) { return std::abs(t.second) < 1e-14; });
        }
        rows.push_back(row);
        rhs.push_back(r);
        pivot_col.push_back(piv);
    }

    std::vector<bool> is_pivot(m, false);
    for (int v : pivot_col) is_pivot[v] = true;
    for (int v = 0; v < m; ++v)
        if (!is_pivot[v]) el.free_vars.push_back(v);
    el.x_particular = Eigen::VectorXd::Zero(m);
    for (std::size_t p = 0; p < rows.size(); ++p) el.x_particular[pivot_col[p]] = rhs[p];
    el.pivot_vars = pivot_col;
    el.pivot_rows = rows;   // x_pivot = rhs - rows . x_free
    el.pivot_shift = rhs;
    return el;
}

// Dense symmetric per-variable coefficient data of one embedded block.
struct IpmBlock {
    int n = 0;  // embedded dimension
    Eigen::MatrixXd C;
    std::vector<int> vars;  // z indices with support here
    std::vector<std::vector<std::tuple<int, int, double>>> A;  // triplets per var
};

inline void add_embedded(std::map<std::pair<int, int>, double>& out, int i, int j,
                         Complex v, int n) {
    if (v.real() != 0.0) {
        out[{i, j}] += v.real();
        out[{i + n, j + n}] += v.real();
    }
    if (v.imag() != 0.0) {
        out[{i, j + n}] += -v.imag();
        out[{i + n, j}] += v.imag();
    }
}

inline double max_step(const Eigen::MatrixXd& P, const Eigen::MatrixXd& D) {
    // largest alpha with P + alpha D >= 0, for P > 0
    Eigen::LLT<Eigen::MatrixXd> llt(P);
    if (llt.info() != Eigen::Success) return 0.0;
    Eigen::MatrixXd L = llt.matrixL();
    Eigen::MatrixXd W = L.triangularView<Eigen::Lower>().solve(D);
    W = L.triangularView<Eigen::Lower>().solve(W.transpose()).transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (W + W.transpose()),
                                                      Eigen::EigenvaluesOnly);
    double lmin = es.eigenvalues().minCoeff();
    if (lmin >= -1e-14) return std::numeric_limits<double>::infinity();
    return -1.0 / lmin;
}

}  // namespace detail

inline SdpSolution solve_sdp(const SdpProblem& prob, double tol = 1e-8) {
    if (tol < 1e-10 || tol > 1e-4)
        throw std::invalid_argument("solve_sdp: tol outside [1e-10, 1e-4]");
    const int m = prob.num_vars;
    const double sense = prob.maximize ? 1.0 : -1.0;

    SdpSolution sol;

    // objective as a dense vector (internally always maximized)
    Eigen::VectorXd c = Eigen::VectorXd::Zero(m);
    {
        RealAffine obj = prob.objective;
        obj.compress();
        for (const auto& [v, w] : obj.terms) c[v] += sense * w;
    }

    detail::Elimination el = detail::eliminate_equalities(m, prob.equalities);
    if (!el.consistent) {
        sol.status = SdpStatus::Infeasible;
        return sol;
    }
    const int mf = static_cast<int>(el.free_vars.size());
    std::vector<int> z_of_x(m, -1);
    for (int f = 0; f < mf; ++f) z_of_x[el.free_vars[f]] = f;

    // reduced objective: b^T z + const
    Eigen::VectorXd b = Eigen::VectorXd::Zero(mf);
    for (int f = 0; f < mf; ++f) b[f] = c[el.free_vars[f]];
    for (std::size_t p = 0; p < el.pivot_vars.size(); ++p) {
        double cp = c[el.pivot_vars[p]];
        if (cp == 0.0) continue;
        for (const auto& [v, cv] : el.pivot_rows[p]) b[z_of_x[v]] -= cp * cv;
    }

    // embedded blocks over free variables
    std::vector<detail::IpmBlock> blocks;
    for (const SdpBlock& sb : prob.blocks) {
        detail::IpmBlock ib;
        ib.n = 2 * sb.n;
        Eigen::MatrixXcd C0 = sb.F0;
        std::map<int, std::map<std::pair<int, int>, double>> per_var;
        for (const auto& [xv, trips] : sb.coeffs) {
            // constant and pivot substitution
            double shift = el.x_particular[xv];
            if (shift != 0.0)
                for (const auto& [i, j, v] : trips) C0(i, j) += v * shift;
            if (z_of_x[xv] >= 0) {
                auto& dst = per_var[z_of_x[xv]];
                for (const auto& [i, j, v] : trips) detail::add_embedded(dst, i, j, v, sb.n);
            } else {
                // x_piv = shift - sum coeff z  (shift applied above)
                for (std::size_t p = 0; p < el.pivot_vars.size(); ++p) {
                    if (el.pivot_vars[p] != xv) continue;
                    for (const auto& [fv, cv] : el.pivot_rows[p]) {
                        auto& dst = per_var[z_of_x[fv]];
                        for (const auto& [i, j, v] : trips)
                            detail::add_embedded(dst, i, j, -cv * v, sb.n);
                    }
                    break;
                }
            }
        }
        ib.C = embed_hermitian(0.5 * (C0 + C0.adjoint()));
        for (auto& [f, entries] : per_var) {
            std::vector<std::tuple<int, int, double>> trips;
            for (const auto& [pos, v] : entries)
                if (std::abs(v) > 1e-14) trips.emplace_back(pos.first, pos.second, v);
            if (trips.empty()) continue;
            ib.vars.push_back(f);
            ib.A.push_back(std::move(trips));
        }
        blocks.push_back(std::move(ib));
    }

    // variables with no cone support must have zero reduced cost
    std::vector<bool> in_cone(mf, false);
    for (const auto& ib : blocks)
        for (int f : ib.vars) in_cone[f] = true;
    for (int f = 0; f < mf; ++f) {
        if (!in_cone[f] && std::abs(b[f]) > 1e-12) {
            sol.status = SdpStatus::Unbounded;
            return sol;
        }
    }

    auto recover_x = [&](const Eigen::VectorXd& z) {
        Eigen::VectorXd x = el.x_particular;
        for (int f = 0; f < mf; ++f) x[el.free_vars[f]] += z[f];
        for (std::size_t p = 0; p < el.pivot_vars.size(); ++p)
            for (const auto& [v, cv] : el.pivot_rows[p])
                x[el.pivot_vars[p]] -= cv * x[v];
        return x;
    };

    auto finalize = [&](const Eigen::VectorXd& z, SdpStatus status, double gap, int iters) {
        sol.status = status;
        sol.x = recover_x(z);
        sol.value = prob.objective.eval(sol.x);
        sol.gap = gap;
        sol.iterations = iters;
        double viol = 0.0;
        for (const SdpBlock& sb : prob.blocks) {
            Eigen::MatrixXcd M = sb.evaluate(sol.x);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M, Eigen::EigenvaluesOnly);
            viol = std::max(viol, std::max(0.0, -es.eigenvalues().minCoeff()));
        }
        for (const LinearConstraint& e : prob.equalities) {
            double r = -e.rhs;
            for (const auto& [v, w] : e.terms) r += w * sol.x[v];
            viol = std::max(viol, std::abs(r));
        }
        sol.max_violation = viol;
        return sol;
    };

    if (mf == 0 || blocks.empty()) {
        // fully determined (or unconstrained in the cone): check feasibility
        Eigen::VectorXd z = Eigen::VectorXd::Zero(mf);
        SdpSolution s = finalize(z, SdpStatus::Optimal, 0.0, 0);
        if (s.max_violation > 1e-7) s.status = SdpStatus::Infeasible;
        return s;
    }

    const int nb = static_cast<int>(blocks.size());
    int total_dim = 0;
    for (const auto& ib : blocks) total_dim += ib.n;

    // initial point
    double cnorm = 1.0, anorm = 1.0;
    for (const auto& ib : blocks) {
        cnorm = std::max(cnorm, ib.C.cwiseAbs().maxCoeff());
        for (const auto& trips : ib.A)
            for (const auto& [i, j, v] : trips) anorm = std::max(anorm, std::abs(v));
    }
    double xscale = std::max({10.0, b.cwiseAbs().maxCoeff(), anorm});
    double sscale = std::max({10.0, cnorm, anorm});
    std::vector<Eigen::MatrixXd> X(nb), S(nb);
    for (int j = 0; j < nb; ++j) {
        X[j] = xscale * Eigen::MatrixXd::Identity(blocks[j].n, blocks[j].n);
        S[j] = sscale * Eigen::MatrixXd::Identity(blocks[j].n, blocks[j].n);
    }
    Eigen::VectorXd z = Eigen::VectorXd::Zero(mf);

    const int max_iter = 200;
    double best_rd = std::numeric_limits<double>::infinity();
    double best_rp = std::numeric_limits<double>::infinity();

    // best iterate by combined merit, kept as a fallback for degenerate
    // problems where the residuals stall above the target tolerance
    double best_merit = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_z = z;
    double best_gap = std::numeric_limits<double>::infinity();
    int best_iter = 0;
    int stall = 0;

    auto sparse_dot = [](const std::vector<std::tuple<int, int, double>>& trips,
                         const Eigen::MatrixXd& M) {
        double s = 0.0;
        for (const auto& [i, j, v] : trips) s += v * M(j, i);
        return s;
    };

    for (int iter = 0; iter < max_iter; ++iter) {
        // residuals
        std::vector<Eigen::MatrixXd> Rd(nb);
        double rd_norm = 0.0;
        for (int j = 0; j < nb; ++j) {
            Eigen::MatrixXd T = blocks[j].C - S[j];
            for (std::size_t k = 0; k < blocks[j].vars.size(); ++k) {
                double zv = z[blocks[j].vars[k]];
                if (zv == 0.0) continue;
                for (const auto& [r, cidx, v] : blocks[j].A[k]) T(r, cidx) += v * zv;
            }
            Rd[j] = T;
            rd_norm = std::max(rd_norm, T.cwiseAbs().maxCoeff() / (1.0 + cnorm));
        }
        Eigen::VectorXd rp = b;
        for (int j = 0; j < nb; ++j)
            for (std::size_t k = 0; k < blocks[j].vars.size(); ++k)
                rp[blocks[j].vars[k]] += sparse_dot(blocks[j].A[k], X[j]);
        double rp_norm = rp.cwiseAbs().maxCoeff() / (1.0 + b.cwiseAbs().maxCoeff());

        double mu_total = 0.0;
        for (int j = 0; j < nb; ++j) mu_total += (X[j] * S[j]).trace();
        double obj = b.dot(z);
        double relgap = std::abs(mu_total) / (1.0 + std::abs(obj));

        // divergence of the primal trace with a clean primal residual is an
        // improving ray: the LMI system has no PSD solution
        if (!std::isfinite(mu_total) || !std::isfinite(rp_norm) ||
            !std::isfinite(rd_norm) || mu_total > 1e20)
            break;

        best_rd = std::min(best_rd, rd_norm);
        best_rp = std::min(best_rp, rp_norm);

        if (relgap <= tol && rp_norm <= tol && rd_norm <= tol)
            return finalize(z, SdpStatus::Optimal, mu_total, iter);
        if (std::abs(obj) > 1e13)
            return finalize(z, SdpStatus::Unbounded, mu_total, iter);

        double merit = std::max({relgap, rp_norm, rd_norm});
        if (merit < 0.9 * best_merit) {
            best_merit = merit;
            best_z = z;
            best_gap = mu_total;
            best_iter = iter;
            stall = 0;
        } else if (++stall >= 20) {
            break;  // no more progress to be had
        }

        double mu = mu_total / total_dim;

        // factorizations
        std::vector<Eigen::MatrixXd> Sinv(nb);
        bool ok = true;
        for (int j = 0; j < nb; ++j) {
            Eigen::LLT<Eigen::MatrixXd> llt(S[j]);
            if (llt.info() != Eigen::Success) { ok = false; break; }
            Sinv[j] = llt.solve(Eigen::MatrixXd::Identity(blocks[j].n, blocks[j].n));
        }
        if (!ok) break;

        // Schur complement M_{fl} = sum_j tr(A_f X A_l S^{-1}) over block support
        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(mf, mf);
        std::vector<std::vector<Eigen::MatrixXd>> W(nb);
        for (int j = 0; j < nb; ++j) {
            const auto& ib = blocks[j];
            W[j].resize(ib.vars.size());
            for (std::size_t k = 0; k < ib.vars.size(); ++k) {
                // W_k = X A_k S^{-1}
                Eigen::MatrixXd T = Eigen::MatrixXd::Zero(ib.n, ib.n);
                for (const auto& [r, cidx, v] : ib.A[k]) T.col(cidx) += v * X[j].col(r);
                W[j][k] = T * Sinv[j];
            }
            for (std::size_t k = 0; k < ib.vars.size(); ++k)
                for (std::size_t l = 0; l <= k; ++l) {
                    double val = sparse_dot(ib.A[l], W[j][k]);
                    M(ib.vars[k], ib.vars[l]) += val;
                    if (k != l) M(ib.vars[l], ib.vars[k]) += val;
                }
        }
        for (int f = 0; f < mf; ++f)
            if (!in_cone[f]) M(f, f) = 1.0;  // inert variables
        M = 0.5 * (M + M.transpose());
        Eigen::LDLT<Eigen::MatrixXd> Mfac(M +
            1e-13 * std::max(1.0, M.diagonal().cwiseAbs().maxCoeff()) *
                Eigen::MatrixXd::Identity(mf, mf));
        if (Mfac.info() != Eigen::Success)
            return finalize(z, SdpStatus::NumericalFailure, mu_total, iter);

        auto solve_direction = [&](double sigma_mu,
                                   const std::vector<Eigen::MatrixXd>* corr,
                                   Eigen::VectorXd& dz, std::vector<Eigen::MatrixXd>& dX,
                                   std::vector<Eigen::MatrixXd>& dS) {
            // Psi_j = sigma*mu*S^{-1} - X - (X Rd + corr) S^{-1}
            Eigen::VectorXd rhs = rp;
            std::vector<Eigen::MatrixXd> Psi(nb);
            for (int j = 0; j < nb; ++j) {
                Eigen::MatrixXd num = X[j] * Rd[j];
                if (corr) num += (*corr)[j];
                Psi[j] = sigma_mu * Sinv[j] - X[j] - num * Sinv[j];
                for (std::size_t k = 0; k < blocks[j].vars.size(); ++k)
                    rhs[blocks[j].vars[k]] += sparse_dot(blocks[j].A[k], Psi[j]);
            }
            dz = Mfac.solve(rhs);
            for (int ref = 0; ref < 2; ++ref) dz += Mfac.solve(rhs - M * dz);
            dS.resize(nb);
            dX.resize(nb);
            for (int j = 0; j < nb; ++j) {
                Eigen::MatrixXd AdZ = Eigen::MatrixXd::Zero(blocks[j].n, blocks[j].n);
                for (std::size_t k = 0; k < blocks[j].vars.size(); ++k) {
                    double w = dz[blocks[j].vars[k]];
                    if (w == 0.0) continue;
                    for (const auto& [r, cidx, v] : blocks[j].A[k]) AdZ(r, cidx) += v * w;
                }
                dS[j] = Rd[j] + AdZ;
                Eigen::MatrixXd D = Psi[j] - X[j] * AdZ * Sinv[j];
                dX[j] = 0.5 * (D + D.transpose());
            }
        };

        // predictor
        Eigen::VectorXd dz;
        std::vector<Eigen::MatrixXd> dX, dS;
        solve_direction(0.0, nullptr, dz, dX, dS);
        double ap = std::numeric_limits<double>::infinity();
        double ad = std::numeric_limits<double>::infinity();
        for (int j = 0; j < nb; ++j) {
            ap = std::min(ap, detail::max_step(X[j], dX[j]));
            ad = std::min(ad, detail::max_step(S[j], dS[j]));
        }
        ap = std::min(1.0, 0.98 * ap);
        ad = std::min(1.0, 0.98 * ad);
        double mu_aff = 0.0;
        for (int j = 0; j < nb; ++j)
            mu_aff += ((X[j] + ap * dX[j]) * (S[j] + ad * dS[j])).trace();
        mu_aff /= total_dim;
        double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3.0);
        sigma = std::clamp(sigma, 1e-6, 0.9);

        // corrector
        std::vector<Eigen::MatrixXd> corr(nb);
        for (int j = 0; j < nb; ++j) corr[j] = dX[j] * dS[j];
        solve_direction(sigma * mu, &corr, dz, dX, dS);
        ap = std::numeric_limits<double>::infinity();
        ad = std::numeric_limits<double>::infinity();
        for (int j = 0; j < nb; ++j) {
            ap = std::min(ap, detail::max_step(X[j], dX[j]));
            ad = std::min(ad, detail::max_step(S[j], dS[j]));
        }
        ap = std::min(1.0, 0.98 * ap);
        ad = std::min(1.0, 0.98 * ad);
        if (ap < 1e-10 && ad < 1e-10) break;

        for (int j = 0; j < nb; ++j) {
            X[j] += ap * dX[j];
            S[j] += ad * dS[j];
            X[j] = 0.5 * (X[j] + X[j].transpose());
            S[j] = 0.5 * (S[j] + S[j].transpose());
        }
        z += ad * dz;
    }

    // No full convergence: accept the best iterate when it is near-optimal
    // (degenerate problems without a strictly feasible point stall there),
    // otherwise classify by the residual that refused to go away. A dual
    // residual floor means the LMI system itself admits no PSD completion.
    if (best_merit <= std::max(1e-4, 10.0 * tol))
        return finalize(best_z, SdpStatus::Optimal, std::max(best_gap, best_merit),
                        best_iter);
    SdpSolution s = finalize(z, SdpStatus::NumericalFailure, 0.0, max_iter);
    if (best_rd > 1e3 * tol && best_rp <= 1e3 * tol)
        s.status = SdpStatus::Infeasible;
    else if (best_rp > 1e3 * tol && best_rd <= 1e3 * tol)
        s.status = SdpStatus::Unbounded;
    return s;
}

// Plain-text dump of a problem for debugging against external solvers.
inline void dump_problem(const SdpProblem& p, std::ostream& out) {
    out << "SDPLMI 1\n";
    out << "vars " << p.num_vars << "\n";
    out << "sense " << (p.maximize ? "max" : "min") << "\n";
    out << "objective " << p.objective.constant;
    RealAffine obj = p.objective;
    obj.compress();
    out << ' ' << obj.terms.size();
    for (const auto& [v, c] : obj.terms) out << ' ' << v << ' ' << c;
    out << "\n";
    out << "blocks " << p.blocks.size() << "\n";
    for (const SdpBlock& b : p.blocks) {
        out << "block " << b.n << "\n";
        for (int i = 0; i < b.n; ++i)
            for (int j = 0; j < b.n; ++j)
                if (b.F0(i, j) != Complex{})
                    out << "F0 " << i << ' ' << j << ' ' << b.F0(i, j).real() << ' '
                        << b.F0(i, j).imag() << "\n";
        for (const auto& [v, trips] : b.coeffs)
            for (const auto& [i, j, val] : trips)
                out << "F " << v << ' ' << i << ' ' << j << ' ' << val.real() << ' '
                    << val.imag() << "\n";
        out << "endblock\n";
    }
    out << "equalities " << p.equalities.size() << "\n";
    for (const LinearConstraint& e : p.equalities) {
        out << e.rhs << ' ' << e.terms.size();
        for (const auto& [v, c] : e.terms) out << ' ' << v << ' ' << c;
        out << "\n";
    }
}

inline SdpProblem load_problem(std::istream& in) {
    SdpProblem p;
    std::string tok;
    in >> tok;
    if (tok != "SDPLMI") throw std::invalid_argument("load_problem: bad magic");
    int version, nblocks, nterms;
    in >> version;
    in >> tok >> p.num_vars;
    in >> tok >> tok;
    p.maximize = (tok == "max");
    in >> tok >> p.objective.constant >> nterms;
    for (int t = 0; t < nterms; ++t) {
        int v; double c;
        in >> v >> c;
        p.objective.add(v, c);
    }
    in >> tok >> nblocks;
    for (int bi = 0; bi < nblocks; ++bi) {
        SdpBlock b;
        in >> tok >> b.n;
        b.F0 = Eigen::MatrixXcd::Zero(b.n, b.n);
        while (in >> tok && tok != "endblock") {
            if (tok == "F0") {
                int i, j; double re, im;
                in >> i >> j >> re >> im;
                b.F0(i, j) = Complex{re, im};
            } else if (tok == "F") {
                int v, i, j; double re, im;
                in >> v >> i >> j >> re >> im;
                b.add(v, i, j, Complex{re, im});
            } else {
                throw std::invalid_argument("load_problem: unexpected token " + tok);
            }
        }
        p.blocks.push_back(std::move(b));
    }
    int neq;
    in >> tok >> neq;
    for (int e = 0; e < neq; ++e) {
        LinearConstraint c;
        in >> c.rhs >> nterms;
        for (int t = 0; t < nterms; ++t) {
            int v; double w;
            in >> v >> w;
            c.terms.emplace_back(v, w);
        }
        p.equalities.push_back(std::move(c));
    }
    return p;
}

}  // namespace immsdp
