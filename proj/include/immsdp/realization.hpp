#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "moment.hpp"
#include "scenario.hpp"
#include "words.hpp"

// Explicit finite-dimensional realizations: states, instruments in Kraus
// form, POVMs, Born-rule evaluation and numeric moment matrices. These
// provide the independent oracle against which the symbolic machinery and
// the SDP relaxations are checked, and they drive the sampled-span
// construction of the dimension/rank-restricted sets.

namespace immsdp {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

// Deterministic Gaussian source; std::normal_distribution is implementation
// defined, so Box-Muller is rolled by hand to keep artifacts reproducible.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() {
        return (engine_() >> 11) * (1.0 / 9007199254740992.0);  // [0,1)
    }

    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 <= 1e-300) u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * M_PI * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * M_PI * u2);
    }

    Complex cgaussian() { return Complex{gaussian(), gaussian()} * M_SQRT1_2; }

    MatrixXcd ginibre(int rows, int cols) {
        MatrixXcd G(rows, cols);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) G(i, j) = cgaussian();
        return G;
    }

    // Haar-ish random unitary: QR of a Ginibre matrix with phase fixing.
    MatrixXcd unitary(int n) {
        Eigen::HouseholderQR<MatrixXcd> qr(ginibre(n, n));
        MatrixXcd Q = qr.householderQ();
        MatrixXcd R = qr.matrixQR().triangularView<Eigen::Upper>();
        for (int i = 0; i < n; ++i) {
            Complex d = R(i, i);
            Q.col(i) *= (std::abs(d) > 0) ? d / std::abs(d) : Complex{1.0, 0.0};
        }
        return Q;
    }

    MatrixXcd density_matrix(int d) {
        MatrixXcd G = ginibre(d, d);
        MatrixXcd rho = G * G.adjoint();
        return rho / rho.trace().real();
    }

  private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

inline int hermitian_rank(const MatrixXcd& H, double tol = 1e-8) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(H, Eigen::EigenvaluesOnly);
    double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    int r = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()[i] > tol * scale) ++r;
    return r;
}

struct Realization {
    Scenario scenario;
    int dim = 2;
    int rank_k = 0;  // 0 = unconstrained
    NormalizationMode mode = NormalizationMode::Instrument;

    MatrixXcd rho;                                       // Instrument mode
    std::vector<std::vector<std::vector<MatrixXcd>>> kraus;  // [x][a][n]
    std::vector<MatrixXcd> states;                       // PreparedState mode, block order
    std::vector<std::vector<MatrixXcd>> povms;           // [y][b]

    // Post-measurement (or prepared) operator of block (a,x).
    MatrixXcd block_state(int a, int x) const {
        if (mode == NormalizationMode::PreparedState)
            return states[static_cast<std::size_t>(a) * scenario.nX + x];
        MatrixXcd out = MatrixXcd::Zero(dim, dim);
        for (const MatrixXcd& K : kraus[x][a]) out += K * rho * K.adjoint();
        return out;
    }

    MatrixXcd word_operator(const OperatorWord& w) const {
        if (w.is_zero()) return MatrixXcd::Zero(dim, dim);
        MatrixXcd M = MatrixXcd::Identity(dim, dim);
        for (const Generator& g : w.letters()) M *= povms[g.setting][g.outcome];
        return M;
    }

    void validate(double tol = 1e-10) const {
        MatrixXcd id = MatrixXcd::Identity(dim, dim);
        if (mode == NormalizationMode::Instrument) {
            if (std::abs(rho.trace().real() - 1.0) > tol || (rho - rho.adjoint()).norm() > tol)
                throw std::invalid_argument("Realization: state not normalized Hermitian");
            Eigen::SelfAdjointEigenSolver<MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
            if (es.eigenvalues().minCoeff() < -tol)
                throw std::invalid_argument("Realization: state not PSD");
            for (int x = 0; x < scenario.nX; ++x) {
                MatrixXcd sum = MatrixXcd::Zero(dim, dim);
                for (int a = 0; a < scenario.nA; ++a)
                    for (const MatrixXcd& K : kraus[x][a]) sum += K.adjoint() * K;
                if ((sum - id).cwiseAbs().maxCoeff() > tol)
                    throw std::invalid_argument("Realization: instrument not trace preserving");
            }
        } else {
            for (const MatrixXcd& s : states)
                if (std::abs(s.trace().real() - 1.0) > tol)
                    throw std::invalid_argument("Realization: prepared state not normalized");
        }
        for (int y = 0; y < scenario.nY; ++y) {
            MatrixXcd sum = MatrixXcd::Zero(dim, dim);
            for (int b = 0; b < scenario.nB; ++b) {
                const MatrixXcd& E = povms[y][b];
                Eigen::SelfAdjointEigenSolver<MatrixXcd> es(E, Eigen::EigenvaluesOnly);
                if (es.eigenvalues().minCoeff() < -tol)
                    throw std::invalid_argument("Realization: POVM element not PSD");
                if (rank_k > 0 && hermitian_rank(E) != rank_k)
                    throw std::invalid_argument("Realization: POVM element has wrong rank");
                sum += E;
            }
            if ((sum - id).cwiseAbs().maxCoeff() > tol)
                throw std::invalid_argument("Realization: POVM not normalized");
        }
    }
};

// Eq.-of-motion oracle: P(a,b|x,y) = tr[E_{b|y} I_{a|x}(rho)].
inline CorrelationTable born_probabilities(const Realization& r) {
    if (r.mode != NormalizationMode::Instrument)
        throw std::invalid_argument("born_probabilities: needs an instrument realization");
    CorrelationTable t(r.scenario);
    for (int a = 0; a < r.scenario.nA; ++a)
        for (int x = 0; x < r.scenario.nX; ++x) {
            MatrixXcd sigma = r.block_state(a, x);
            for (int b = 0; b < r.scenario.nB; ++b)
                for (int y = 0; y < r.scenario.nY; ++y)
                    t.at(a, b, x, y) = (r.povms[y][b] * sigma).trace().real();
        }
    return t;
}

// Success probabilities tr(E_{b|y} rho_block) for prepared-state realizations.
inline std::vector<double> guess_probabilities(const Realization& r, int b, int y) {
    std::vector<double> out;
    for (int a = 0; a < r.scenario.nA; ++a)
        for (int x = 0; x < r.scenario.nX; ++x)
            out.push_back((r.povms[y][b] * r.block_state(a, x)).trace().real());
    return out;
}

// Entrywise tr[ sigma_{a|x} S_j^dag S_i ], evaluated with explicit matrix
// products (independently of the word-reduction rules).
inline std::vector<MatrixXcd> numeric_moments(const Realization& r,
                                              const MonomialBasis& basis) {
    std::vector<MatrixXcd> ops;
    ops.reserve(basis.size());
    for (const OperatorWord& w : basis.words) ops.push_back(r.word_operator(w));
    const int n = static_cast<int>(basis.size());
    std::vector<MatrixXcd> blocks;
    for (int a = 0; a < r.scenario.nA; ++a)
        for (int x = 0; x < r.scenario.nX; ++x) {
            MatrixXcd sigma = r.block_state(a, x);
            MatrixXcd chi(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    chi(i, j) = (sigma * ops[j].adjoint() * ops[i]).trace();
            blocks.push_back(std::move(chi));
        }
    return blocks;
}

namespace detail {

// Random projective measurements: eigenspace grouping of a Haar unitary.
// The word algebra of the hierarchy assumes projectors, so only projective
// second-time measurements are sampled; k = 0 randomizes the ranks.
inline std::vector<std::vector<MatrixXcd>> sample_povms(Rng& rng, int d, int k,
                                                        int nB, int nY) {
    if (k > d) throw std::invalid_argument("sample_povms: rank exceeds dimension");
    if (k > 0 && k * nB != d)
        throw std::invalid_argument(
            "sample_povms: rank-k projective measurements need k*nB == d");
    std::vector<std::vector<MatrixXcd>> povms(nY);
    for (int y = 0; y < nY; ++y) {
        MatrixXcd U = rng.unitary(d);
        std::vector<int> owner(d);
        for (int i = 0; i < d; ++i)
            owner[i] = (k > 0) ? i / k
                               : std::min(nB - 1, static_cast<int>(rng.uniform() * nB));
        povms[y].assign(nB, MatrixXcd::Zero(d, d));
        for (int i = 0; i < d; ++i) {
            VectorXcd u = U.col(i);
            povms[y][owner[i]] += u * u.adjoint();
        }
    }
    return povms;
}

}  // namespace detail

// Random d-dimensional temporal realization: random state, instruments from
// random isometries (channel composed in), rank-k POVMs. k = 0 leaves the
// POVM ranks unconstrained.
inline Realization sample_realization(int d, int k, const Scenario& scenario,
                                      std::uint64_t seed) {
    scenario.validate();
    Rng rng(seed);
    Realization r;
    r.scenario = scenario;
    r.dim = d;
    r.rank_k = k;
    r.mode = NormalizationMode::Instrument;
    r.rho = rng.density_matrix(d);
    // isometry V: C^d -> C^{nA} x C^d x C^d; Kraus K_{a,n} = (<a| x <n| x 1) V
    const int env = d;
    for (int x = 0; x < scenario.nX; ++x) {
        MatrixXcd V = rng.unitary(scenario.nA * env * d).leftCols(d);
        std::vector<std::vector<MatrixXcd>> per_a(scenario.nA);
        for (int a = 0; a < scenario.nA; ++a)
            for (int n = 0; n < env; ++n)
                per_a[a].push_back(V.middleRows((a * env + n) * d, d));
        r.kraus.push_back(std::move(per_a));
    }
    r.povms = detail::sample_povms(rng, d, k, scenario.nB, scenario.nY);
    return r;
}

// Random prepare-and-measure realization: one normalized state per block,
// shared rank-k POVMs.
inline Realization sample_prepared_states(int d, int k, const Scenario& scenario,
                                          std::uint64_t seed) {
    scenario.validate();
    Rng rng(seed);
    Realization r;
    r.scenario = scenario;
    r.dim = d;
    r.rank_k = k;
    r.mode = NormalizationMode::PreparedState;
    for (int i = 0; i < scenario.blocks(); ++i) r.states.push_back(rng.density_matrix(d));
    r.povms = detail::sample_povms(rng, d, k, scenario.nB, scenario.nY);
    return r;
}

}  // namespace immsdp
