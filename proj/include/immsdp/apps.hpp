#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "lp.hpp"
#include "moment.hpp"
#include "realization.hpp"
#include "scenario.hpp"
#include "sdp.hpp"
#include "span.hpp"

// Applications built on the moment-matrix hierarchy: temporal CHSH bounds,
// temporal steering robustness, random-access-code success bounds, and
// prepare-and-measure self-testing fidelities.

namespace immsdp::apps {

struct ConstraintRegime {
    enum class Tag { DI, DIDim, DIDimRank, NSIT };
    Tag tag = Tag::DI;
    int d = 0;
    int k = 0;  // 0 = unconstrained rank
    const SpanBasis* span = nullptr;

    bool needs_span() const { return tag == Tag::DIDim || tag == Tag::DIDimRank; }

    std::string name() const {
        switch (tag) {
            case Tag::DI: return "di";
            case Tag::DIDim: return "dim";
            case Tag::DIDimRank: return "dim-rank";
            default: return "nsit";
        }
    }

    void validate() const {
        if (tag == Tag::DIDim && d < 1)
            throw std::invalid_argument("regime: dimension constraint needs d");
        if (tag == Tag::DIDimRank && (d < 1 || k < 1 || k > d))
            throw std::invalid_argument("regime: rank constraint needs d and k <= d");
    }
};

struct AppResult {
    double value = 0.0;
    SdpStatus status = SdpStatus::NumericalFailure;
    double gap = 0.0;
    double max_violation = 0.0;
    int iterations = 0;
};

namespace detail {

inline void check_span(const ConstraintRegime& regime, const MomentModel& model) {
    if (!regime.needs_span()) return;
    if (!regime.span) throw std::invalid_argument("regime: span basis not provided");
    if (!regime.span->saturated)
        throw std::invalid_argument("regime: span basis is not saturated");
    if (!(regime.span->scenario == model.scenario) || regime.span->level != model.basis.level ||
        regime.span->mode != model.mode)
        throw std::invalid_argument("regime: span basis does not match the model");
    if (regime.span->dim != regime.d ||
        regime.span->rank_k != (regime.tag == ConstraintRegime::Tag::DIDimRank ? regime.k : 0))
        throw std::invalid_argument("regime: span basis has different (d,k)");
}

inline std::vector<LinearConstraint> regime_constraints(const ConstraintRegime& regime,
                                                        const MomentModel& model) {
    regime.validate();
    switch (regime.tag) {
        case ConstraintRegime::Tag::NSIT:
            return nsit_constraints(model);
        case ConstraintRegime::Tag::DIDim:
        case ConstraintRegime::Tag::DIDimRank:
            check_span(regime, model);
            return span_constraints(*regime.span, model, model_family_blocks(model));
        default:
            return {};
    }
}

inline AppResult to_result(const SdpSolution& s) {
    return {s.value, s.status, s.gap, s.max_violation, s.iterations};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Temporal CHSH
// ---------------------------------------------------------------------------

// K = <A0B0> + <A0B1> + <A1B0> - <A1B1>, <AxBy> = P(a=b|xy) - P(a!=b|xy).
inline std::vector<FunctionalCoefficient> chsh_coefficients() {
    std::vector<FunctionalCoefficient> coeffs;
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) {
            double sign = (x == 1 && y == 1) ? -1.0 : 1.0;
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b)
                    coeffs.push_back({a, b, x, y, sign * ((a == b) ? 1.0 : -1.0)});
        }
    return coeffs;
}

inline AppResult chsh_bound(const ConstraintRegime& regime, int level, double tol = 1e-8) {
    MomentModel model = build_model(Scenario{2, 2, 2, 2}, level);
    SdpProblem p;
    p.num_vars = model.num_vars();
    p.maximize = true;
    p.objective = functional(model, chsh_coefficients());
    for (const MomentBlock& blk : model.blocks())
        p.blocks.push_back(SdpBlock::from_entries(blk.entries));
    p.equalities = normalization_constraints(model);
    for (auto& c : detail::regime_constraints(regime, model)) p.equalities.push_back(std::move(c));
    return detail::to_result(solve_sdp(p, tol));
}

// ---------------------------------------------------------------------------
// Temporal steering robustness
// ---------------------------------------------------------------------------

// All deterministic assignments lambda: x -> a.
struct DeterministicStrategySet {
    int nA = 2;
    int nX = 2;
    std::vector<std::vector<int>> strategies;  // strategies[s][x] = a

    static DeterministicStrategySet enumerate(int nA, int nX) {
        DeterministicStrategySet set;
        set.nA = nA;
        set.nX = nX;
        int count = 1;
        for (int x = 0; x < nX; ++x) count *= nA;
        for (int s = 0; s < count; ++s) {
            std::vector<int> lam(nX);
            int v = s;
            for (int x = 0; x < nX; ++x) {
                lam[x] = v % nA;
                v /= nA;
            }
            set.strategies.push_back(std::move(lam));
        }
        return set;
    }

    std::size_t size() const { return strategies.size(); }
};

namespace detail {

// Shared assembly of the steering relaxation:
//   min  sum_lambda tr-moment(sigma_lambda) - 1
//   s.t. sum_lambda delta_{a,lambda(x)} E[sigma_lambda] - E[I_{a|x}(rho)] >= 0,
//        all moment blocks PSD, data / regime constraints.
inline SdpProblem tsr_problem(MomentModel& model, const ConstraintRegime& regime) {
    const Scenario& sc = model.scenario;
    auto regime_rows = regime_constraints(regime, model);  // before free blocks

    DeterministicStrategySet strategies = DeterministicStrategySet::enumerate(sc.nA, sc.nX);
    std::vector<int> sigma_blocks;
    for (std::size_t s = 0; s < strategies.size(); ++s)
        sigma_blocks.push_back(model.add_free_block("sigma_" + std::to_string(s)));

    SdpProblem p;
    p.maximize = false;
    p.objective.constant = -1.0;
    OperatorWord one = OperatorWord::identity();
    for (int sb : sigma_blocks) p.objective += real_part(model.word_value(sb, one));

    for (const MomentBlock& blk : model.blocks())
        p.blocks.push_back(SdpBlock::from_entries(blk.entries));
    const int n = static_cast<int>(model.basis.size());
    for (int a = 0; a < sc.nA; ++a) {
        for (int x = 0; x < sc.nX; ++x) {
            std::vector<std::vector<ComplexAffine>> diff(n, std::vector<ComplexAffine>(n));
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    ComplexAffine e;
                    for (std::size_t s = 0; s < strategies.size(); ++s)
                        if (strategies.strategies[s][x] == a)
                            e += model.blocks()[sigma_blocks[s]].entries[i][j];
                    e -= model.blocks()[model.block_index(a, x)].entries[i][j];
                    diff[i][j] = std::move(e);
                }
            p.blocks.push_back(SdpBlock::from_entries(diff));
        }
    }
    p.num_vars = model.num_vars();
    p.equalities = normalization_constraints(model);
    for (auto& c : regime_rows) p.equalities.push_back(std::move(c));
    return p;
}

}  // namespace detail

// Lower bound on the temporal steering robustness of observed correlations.
inline AppResult tsr_bound(const CorrelationTable& data, const ConstraintRegime& regime,
                           int level, double tol = 1e-8) {
    MomentModel model = build_model(data.scenario(), level);
    SdpProblem p = detail::tsr_problem(model, regime);
    for (auto& c : bind_data(model, data)) p.equalities.push_back(std::move(c));
    return detail::to_result(solve_sdp(p, tol));
}

// Minimal robustness compatible with a given temporal CHSH value; only the
// CHSH value is imposed, not a full correlation table.
inline AppResult tsr_bound_at_chsh(double chsh_value, const ConstraintRegime& regime,
                                   int level, double tol = 1e-8) {
    MomentModel model = build_model(Scenario{2, 2, 2, 2}, level);
    RealAffine k_expr = functional(model, chsh_coefficients());
    SdpProblem p = detail::tsr_problem(model, regime);
    p.equalities.push_back(LinearConstraint::from_affine(k_expr, chsh_value));
    return detail::to_result(solve_sdp(p, tol));
}

struct CurvePoint {
    double parameter = 0.0;
    AppResult result;
};

inline std::vector<double> uniform_grid(double lo, double hi, int points) {
    std::vector<double> g;
    if (points == 1) return {lo};
    for (int i = 0; i < points; ++i) g.push_back(lo + (hi - lo) * i / (points - 1));
    return g;
}

inline std::vector<CurvePoint> tsr_curve(const ConstraintRegime& regime, int level,
                                         const std::vector<double>& grid,
                                         double tol = 1e-8, int workers = 0) {
    std::vector<CurvePoint> out(grid.size());
    if (workers <= 0) {
        unsigned hw = std::thread::hardware_concurrency();
        workers = hw ? static_cast<int>(hw) : 2;
    }
    workers = std::min<int>(workers, static_cast<int>(grid.size()));
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= grid.size()) return;
            out[i].parameter = grid[i];
            try {
                out[i].result = tsr_bound_at_chsh(grid[i], regime, level, tol);
            } catch (const std::exception&) {
                out[i].result = AppResult{};  // per-point failure, curve continues
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return out;
}

// ---------------------------------------------------------------------------
// Quantum random access codes
// ---------------------------------------------------------------------------

// Temporal embedding of the n->1 RAC: a' = x_0, x' = (x_1, ..., x_{n-1}).
inline Scenario qrac_scenario(int n) {
    if (n < 2 || n > 4) throw std::invalid_argument("qrac: n must be in {2,3,4}");
    return Scenario{2, 1 << (n - 1), 2, n};
}

inline int qrac_bit(int x0, int xrest, int y) {
    return (y == 0) ? x0 : ((xrest >> (y - 1)) & 1);
}

// Average success probability P_{n->1} as a functional over the blocks.
inline std::vector<FunctionalCoefficient> qrac_coefficients(int n) {
    Scenario sc = qrac_scenario(n);
    double w = 1.0 / ((1 << n) * n);
    std::vector<FunctionalCoefficient> coeffs;
    for (int x0 = 0; x0 < 2; ++x0)
        for (int xr = 0; xr < sc.nX; ++xr)
            for (int y = 0; y < n; ++y)
                coeffs.push_back({x0, qrac_bit(x0, xr, y), xr, y, w});
    return coeffs;
}

inline double qrac_classical_bound(int n) { return 0.75; }  // P^C for n = 2, 3
inline double qrac_quantum_bound(int n) { return 0.5 * (1.0 + 1.0 / std::sqrt(n)); }

inline AppResult qrac_bound(int n, const ConstraintRegime& regime, int level,
                            double tol = 1e-8) {
    MomentModel model = build_model(qrac_scenario(n), level, NormalizationMode::PreparedState);
    SdpProblem p;
    p.num_vars = model.num_vars();
    p.maximize = true;
    p.objective = functional(model, qrac_coefficients(n));
    for (const MomentBlock& blk : model.blocks())
        p.blocks.push_back(SdpBlock::from_entries(blk.entries));
    p.equalities = detail::regime_constraints(regime, model);
    return detail::to_result(solve_sdp(p, tol));
}

// ---------------------------------------------------------------------------
// Self-testing of the 2->1 preparation
// ---------------------------------------------------------------------------

// Coefficients of the swap-channel fidelity polynomial over the reduced
// words of each preparation block; constants c = cos(pi/8), s = sin(pi/8).
struct FidelityFunctional {
    double c = std::cos(M_PI / 8.0);
    double s = std::sin(M_PI / 8.0);

    double constant() const { return 0.5; }

    std::vector<WordCoefficient> coefficients(const MomentModel& model) const {
        const Generator g0{0, 0}, g1{0, 1};  // E_{0|0}, E_{0|1}
        OperatorWord E0 = OperatorWord::reduce({g0});
        OperatorWord E01 = OperatorWord::reduce({g0, g1});
        OperatorWord E10 = OperatorWord::reduce({g1, g0});
        OperatorWord E010 = OperatorWord::reduce({g0, g1, g0});
        std::vector<WordCoefficient> coeffs;
        for (int x0 = 0; x0 < 2; ++x0)
            for (int x1 = 0; x1 < 2; ++x1) {
                int blk = x0 * model.scenario.nX + x1;
                double s0 = (x0 == 0) ? 1.0 : -1.0;
                double s1 = (x1 == 0) ? 1.0 : -1.0;
                coeffs.push_back({blk, E0, Complex{s0 * (c * c - s * s) / 4.0, 0.0}});
                coeffs.push_back({blk, E010, Complex{-s1 * c * s, 0.0}});  // -4cs/4
                coeffs.push_back({blk, E10, Complex{s1 * c * s / 2.0, 0.0}});
                coeffs.push_back({blk, E01, Complex{s1 * c * s / 2.0, 0.0}});
            }
        return coeffs;
    }
};

// Direct evaluation of the fidelity polynomial on an explicit realization.
inline double fidelity_direct(const Realization& r) {
    MomentModel model = build_model(r.scenario, 2, NormalizationMode::PreparedState);
    FidelityFunctional f;
    double val = f.constant();
    for (const WordCoefficient& t : f.coefficients(model)) {
        int a = t.block / r.scenario.nX;
        int x = t.block % r.scenario.nX;
        Complex w = (r.block_state(a, x) * r.word_operator(t.word)).trace();
        val += (t.coeff * w).real();
    }
    return val;
}

// Certified lower bound on the fidelity with the reference preparation,
// given the observed 2->1 success probability.
inline AppResult selftest_fidelity(double p_obs, const ConstraintRegime& regime, int level,
                                   double tol = 1e-8) {
    if (level < 2)
        throw std::invalid_argument(
            "selftest_fidelity: the fidelity polynomial needs level >= 2 words");
    MomentModel model = build_model(qrac_scenario(2), level, NormalizationMode::PreparedState);
    FidelityFunctional f;
    SdpProblem p;
    p.maximize = false;
    p.objective = word_functional(model, f.coefficients(model));
    p.objective.constant += f.constant();
    for (const MomentBlock& blk : model.blocks())
        p.blocks.push_back(SdpBlock::from_entries(blk.entries));
    p.equalities = detail::regime_constraints(regime, model);
    RealAffine succ = functional(model, qrac_coefficients(2));
    p.equalities.push_back(LinearConstraint::from_affine(succ, p_obs));
    p.num_vars = model.num_vars();
    return detail::to_result(solve_sdp(p, tol));
}

// ---------------------------------------------------------------------------
// Classical fidelity baseline
// ---------------------------------------------------------------------------

// max over diagonal (classical) preparations of the average overlap with the
// reference states, as a linear program.
inline double classical_fidelity(const std::vector<MatrixXcd>& reference) {
    const int nblocks = static_cast<int>(reference.size());
    const int d = static_cast<int>(reference.front().rows());
    LpProblem lp;
    lp.maximize = true;
    lp.c = Eigen::VectorXd::Zero(nblocks * d);
    lp.A_eq = Eigen::MatrixXd::Zero(nblocks, nblocks * d);
    lp.b_eq = Eigen::VectorXd::Ones(nblocks);
    for (int b = 0; b < nblocks; ++b)
        for (int i = 0; i < d; ++i) {
            lp.c[b * d + i] = reference[b](i, i).real() / nblocks;
            lp.A_eq(b, b * d + i) = 1.0;
        }
    LpSolution sol = solve_lp(lp);
    if (sol.status != LpStatus::Optimal)
        throw std::runtime_error("classical_fidelity: LP failed");
    return sol.value;
}

// Closed form: the optimum puts all weight on the largest diagonal entry.
inline double classical_fidelity_closed_form(const std::vector<MatrixXcd>& reference) {
    double total = 0.0;
    for (const MatrixXcd& rho : reference) {
        double best = 0.0;
        for (Eigen::Index i = 0; i < rho.rows(); ++i)
            best = std::max(best, rho(i, i).real());
        total += best;
    }
    return total / static_cast<double>(reference.size());
}

// ---------------------------------------------------------------------------
// Bundled reference realizations
// ---------------------------------------------------------------------------

// Z/X instruments forwarding post-measurement eigenstates, (Z+-X)/sqrt(2)
// second measurements, maximally mixed input: achieves K = 2*sqrt(2).
inline Realization chsh_reference_realization() {
    Realization r;
    r.scenario = Scenario{2, 2, 2, 2};
    r.dim = 2;
    r.rank_k = 1;
    r.mode = NormalizationMode::Instrument;
    r.rho = 0.5 * MatrixXcd::Identity(2, 2);
    auto projector = [](const VectorXcd& v) { return MatrixXcd(v * v.adjoint()); };
    VectorXcd zp(2), zm(2), xp(2), xm(2);
    zp << 1, 0;
    zm << 0, 1;
    xp << M_SQRT1_2, M_SQRT1_2;
    xm << M_SQRT1_2, -M_SQRT1_2;
    r.kraus = {{{projector(zp)}, {projector(zm)}}, {{projector(xp)}, {projector(xm)}}};
    double t = M_PI / 8.0;  // (Z+X)/sqrt(2) eigenbasis
    VectorXcd b0p(2), b0m(2), b1p(2), b1m(2);
    b0p << std::cos(t), std::sin(t);
    b0m << -std::sin(t), std::cos(t);
    b1p << std::cos(t), -std::sin(t);
    b1m << std::sin(t), std::cos(t);
    r.povms = {{projector(b0p), projector(b0m)}, {projector(b1p), projector(b1m)}};
    return r;
}

// Reference 2->1 preparation (cos/sin(pi/8) states) with Z and X readout.
inline Realization qrac_reference_realization() {
    Realization r;
    r.scenario = qrac_scenario(2);
    r.dim = 2;
    r.rank_k = 1;
    r.mode = NormalizationMode::PreparedState;
    double c = std::cos(M_PI / 8.0), s = std::sin(M_PI / 8.0);
    auto pure = [](double a0, double a1) {
        VectorXcd v(2);
        v << a0, a1;
        return MatrixXcd(v * v.adjoint());
    };
    // block order (x0, x1): (0,0), (0,1), (1,0), (1,1)
    r.states = {pure(c, s), pure(-c, s), pure(s, c), pure(s, -c)};
    VectorXcd zp(2), zm(2), xp(2), xm(2);
    zp << 1, 0;
    zm << 0, 1;
    xp << M_SQRT1_2, M_SQRT1_2;
    xm << M_SQRT1_2, -M_SQRT1_2;
    auto projector = [](const VectorXcd& v) { return MatrixXcd(v * v.adjoint()); };
    r.povms = {{projector(zp), projector(zm)}, {projector(xp), projector(xm)}};
    return r;
}

// Average 2->1 success probability of a prepared-state realization.
inline double qrac_success_probability(const Realization& r, int n) {
    Scenario sc = qrac_scenario(n);
    double total = 0.0;
    for (int x0 = 0; x0 < 2; ++x0)
        for (int xr = 0; xr < sc.nX; ++xr) {
            MatrixXcd rho = r.block_state(x0, xr);
            for (int y = 0; y < n; ++y) {
                int t = qrac_bit(x0, xr, y);
                total += (r.povms[y][t] * rho).trace().real();
            }
        }
    return total / ((1 << n) * n);
}

}  // namespace immsdp::apps
