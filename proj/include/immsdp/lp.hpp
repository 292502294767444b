#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

// Dense two-phase simplex for the tiny linear programs in scope
// (classical-fidelity baselines, test oracles).

namespace immsdp {

struct LpProblem {
    Eigen::VectorXd c;
    bool maximize = false;
    Eigen::MatrixXd A_ub;  // A_ub x <= b_ub (may be empty)
    Eigen::VectorXd b_ub;
    Eigen::MatrixXd A_eq;  // A_eq x = b_eq (may be empty)
    Eigen::VectorXd b_eq;
    Eigen::VectorXd lo;    // defaults to 0 when empty
    Eigen::VectorXd hi;    // defaults to +inf when empty
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    double value = 0.0;
    Eigen::VectorXd x;
};

namespace detail {

// Bland's rule simplex on a dense tableau; returns false when unbounded.
inline bool simplex_iterate(Eigen::MatrixXd& T, std::vector<int>& basis, int ncols) {
    const int nrows = static_cast<int>(T.rows()) - 1;
    for (;;) {
        int enter = -1;
        for (int j = 0; j < ncols; ++j) {
            if (T(nrows, j) < -1e-10) { enter = j; break; }
        }
        if (enter < 0) return true;
        int leave = -1;
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < nrows; ++i) {
            if (T(i, enter) > 1e-10) {
                double ratio = T(i, ncols) / T(i, enter);
                if (ratio < best - 1e-12 ||
                    (ratio < best + 1e-12 && (leave < 0 || basis[i] < basis[leave]))) {
                    best = ratio;
                    leave = i;
                }
            }
        }
        if (leave < 0) return false;
        double piv = T(leave, enter);
        T.row(leave) /= piv;
        for (int i = 0; i <= nrows; ++i) {
            if (i == leave) continue;
            double w = T(i, enter);
            if (w != 0.0) T.row(i) -= w * T.row(leave);
        }
        basis[leave] = enter;
    }
}

}  // namespace detail

inline LpSolution solve_lp(const LpProblem& prob) {
    const int n = static_cast<int>(prob.c.size());
    const double inf = std::numeric_limits<double>::infinity();
    Eigen::VectorXd lo = prob.lo.size() ? prob.lo : Eigen::VectorXd::Zero(n);
    Eigen::VectorXd hi = prob.hi.size() ? prob.hi : Eigen::VectorXd::Constant(n, inf);

    // map each original variable to nonnegative columns: x = shift + P u
    struct VarMap { int col_pos; int col_neg; double shift; double sign; };
    std::vector<VarMap> vmap(n);
    int cols = 0;
    std::vector<std::pair<int, double>> upper_rows;  // (var, width) for two-sided bounds
    for (int v = 0; v < n; ++v) {
        if (std::isfinite(lo[v])) {
            vmap[v] = {cols++, -1, lo[v], 1.0};
            if (std::isfinite(hi[v])) upper_rows.emplace_back(v, hi[v] - lo[v]);
        } else if (std::isfinite(hi[v])) {
            vmap[v] = {cols++, -1, hi[v], -1.0};
        } else {
            vmap[v] = {cols, cols + 1, 0.0, 1.0};
            cols += 2;
        }
    }

    const int n_ub = static_cast<int>(prob.b_ub.size());
    const int n_eq = static_cast<int>(prob.b_eq.size());
    const int n_bd = static_cast<int>(upper_rows.size());
    const int nrows = n_ub + n_eq + n_bd;
    const int nslack = n_ub + n_bd;
    const int total = cols + nslack + nrows;  // structural + slack + artificial

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(nrows, total);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(nrows);
    auto scatter = [&](int row, int v, double coeff) {
        A(row, vmap[v].col_pos) += coeff * vmap[v].sign;
        if (vmap[v].col_neg >= 0) A(row, vmap[v].col_neg) -= coeff;
    };
    int row = 0;
    int slack = cols;
    for (int i = 0; i < n_ub; ++i, ++row) {
        double r = prob.b_ub[i];
        for (int v = 0; v < n; ++v) {
            double coeff = prob.A_ub(i, v);
            if (coeff == 0.0) continue;
            scatter(row, v, coeff);
            r -= coeff * vmap[v].shift;
        }
        A(row, slack++) = 1.0;
        b[row] = r;
    }
    for (int i = 0; i < n_eq; ++i, ++row) {
        double r = prob.b_eq[i];
        for (int v = 0; v < n; ++v) {
            double coeff = prob.A_eq(i, v);
            if (coeff == 0.0) continue;
            scatter(row, v, coeff);
            r -= coeff * vmap[v].shift;
        }
        b[row] = r;
    }
    for (const auto& [v, width] : upper_rows) {
        A(row, vmap[v].col_pos) = 1.0;
        A(row, slack++) = 1.0;
        b[row] = width;
        ++row;
    }
    for (int i = 0; i < nrows; ++i) {
        if (b[i] < 0) { A.row(i) *= -1.0; b[i] *= -1.0; }
        A(i, cols + nslack + i) = 1.0;
    }

    // phase 1: minimize the artificial sum
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(nrows + 1, total + 1);
    T.topLeftCorner(nrows, total) = A;
    T.col(total).head(nrows) = b;
    std::vector<int> basis(nrows);
    for (int i = 0; i < nrows; ++i) {
        basis[i] = cols + nslack + i;
        T.row(nrows) -= T.row(i);  // reduced costs of min sum(artificials)
    }
    T(nrows, total) = -b.sum();
    for (int j = cols + nslack; j < total; ++j) T(nrows, j) = 0.0;
    if (!detail::simplex_iterate(T, basis, total)) return {LpStatus::Unbounded, 0.0, {}};
    if (-T(nrows, total) > 1e-8) return {LpStatus::Infeasible, 0.0, {}};

    // pivot remaining artificials out or drop their rows
    for (int i = 0; i < nrows; ++i) {
        if (basis[i] < cols + nslack) continue;
        int enter = -1;
        for (int j = 0; j < cols + nslack; ++j)
            if (std::abs(T(i, j)) > 1e-9) { enter = j; break; }
        if (enter < 0) continue;  // redundant row
        double piv = T(i, enter);
        T.row(i) /= piv;
        for (int k = 0; k <= nrows; ++k) {
            if (k == i) continue;
            double w = T(k, enter);
            if (w != 0.0) T.row(k) -= w * T.row(i);
        }
        basis[i] = enter;
    }

    // phase 2 objective (internally minimize)
    double sense = prob.maximize ? -1.0 : 1.0;
    Eigen::VectorXd cost = Eigen::VectorXd::Zero(total);
    double cshift = 0.0;
    for (int v = 0; v < n; ++v) {
        double cv = sense * prob.c[v];
        cost[vmap[v].col_pos] += cv * vmap[v].sign;
        if (vmap[v].col_neg >= 0) cost[vmap[v].col_neg] -= cv;
        cshift += cv * vmap[v].shift;
    }
    for (int j = cols + nslack; j < total; ++j) cost[j] = 1e30;  // keep artificials out
    T.row(nrows).setZero();
    T.row(nrows).head(total) = cost;
    for (int i = 0; i < nrows; ++i)
        if (cost[basis[i]] != 0.0) T.row(nrows) -= cost[basis[i]] * T.row(i);
    if (!detail::simplex_iterate(T, basis, total)) return {LpStatus::Unbounded, 0.0, {}};

    Eigen::VectorXd u = Eigen::VectorXd::Zero(total);
    for (int i = 0; i < nrows; ++i) u[basis[i]] = T(i, total);
    LpSolution sol;
    sol.status = LpStatus::Optimal;
    sol.x = Eigen::VectorXd::Zero(n);
    for (int v = 0; v < n; ++v) {
        double val = vmap[v].shift + vmap[v].sign * u[vmap[v].col_pos];
        if (vmap[v].col_neg >= 0) val -= u[vmap[v].col_neg];
        sol.x[v] = val;
    }
    sol.value = prob.c.dot(sol.x);
    return sol;
}

}  // namespace immsdp
