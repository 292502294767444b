#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "immsdp/apps.hpp"

using namespace immsdp;
using apps::ConstraintRegime;

namespace {

SpanBasis make_span(NormalizationMode mode, const Scenario& sc, int d, int k, int level,
                    std::uint64_t seed = 1) {
    SpanParams p;
    p.mode = mode;
    p.scenario = sc;
    p.dim = d;
    p.rank_k = k;
    p.level = level;
    p.seed = seed;
    SpanBasis sb = build_span(p);
    REQUIRE(sb.saturated);
    return sb;
}

ConstraintRegime di() { return {}; }

ConstraintRegime nsit() {
    ConstraintRegime r;
    r.tag = ConstraintRegime::Tag::NSIT;
    return r;
}

ConstraintRegime dim_regime(const SpanBasis& sb) {
    ConstraintRegime r;
    r.tag = ConstraintRegime::Tag::DIDim;
    r.d = sb.dim;
    r.span = &sb;
    return r;
}

ConstraintRegime rank_regime(const SpanBasis& sb) {
    ConstraintRegime r;
    r.tag = ConstraintRegime::Tag::DIDimRank;
    r.d = sb.dim;
    r.k = sb.rank_k;
    r.span = &sb;
    return r;
}

}  // namespace

TEST_CASE("CHSH coefficient table") {
    auto coeffs = apps::chsh_coefficients();
    REQUIRE(coeffs.size() == 16);
    double w00 = 0, w11 = 0;
    for (const auto& c : coeffs) {
        if (c.x == 0 && c.y == 0 && c.a == c.b) w00 += c.weight;
        if (c.x == 1 && c.y == 1 && c.a == c.b) w11 += c.weight;
    }
    CHECK(w00 == 2.0);
    CHECK(w11 == -2.0);
}

TEST_CASE("CHSH per regime") {
    const double root8 = 2.0 * std::sqrt(2.0);
    apps::AppResult r_di = apps::chsh_bound(di(), 1);
    REQUIRE(r_di.status == SdpStatus::Optimal);
    CHECK(std::abs(r_di.value - 4.0) < 1e-6);

    apps::AppResult r_nsit = apps::chsh_bound(nsit(), 1);
    REQUIRE(r_nsit.status == SdpStatus::Optimal);
    CHECK(std::abs(r_nsit.value - root8) < 1e-6);

    SpanBasis span_d = make_span(NormalizationMode::Instrument, Scenario{2, 2, 2, 2}, 2, 0, 1);
    apps::AppResult r_dim = apps::chsh_bound(dim_regime(span_d), 1);
    REQUIRE(r_dim.status == SdpStatus::Optimal);
    CHECK(std::abs(r_dim.value - 4.0) < 1e-4);

    SpanBasis span_dk = make_span(NormalizationMode::Instrument, Scenario{2, 2, 2, 2}, 2, 1, 1);
    apps::AppResult r_rank = apps::chsh_bound(rank_regime(span_dk), 1);
    REQUIRE(r_rank.status == SdpStatus::Optimal);
    CHECK(std::abs(r_rank.value - root8) < 1e-4);

    // regime ordering: more structure cannot raise the bound
    CHECK(r_dim.value <= r_di.value + 1e-6);
    CHECK(r_rank.value <= r_dim.value + 1e-6);
    CHECK(r_nsit.value <= r_di.value + 1e-6);
}

TEST_CASE("CHSH level behavior") {
    double prev_nsit = 10.0;
    for (int level = 1; level <= 3; ++level) {
        apps::AppResult a = apps::chsh_bound(di(), level);
        REQUIRE(a.status == SdpStatus::Optimal);
        CHECK(std::abs(a.value - 4.0) < 1e-6);
        apps::AppResult b = apps::chsh_bound(nsit(), level);
        REQUIRE(b.status == SdpStatus::Optimal);
        CHECK(b.value <= prev_nsit + 1e-7);
        prev_nsit = b.value;
    }
}

TEST_CASE("regime validation") {
    ConstraintRegime bad;
    bad.tag = ConstraintRegime::Tag::DIDim;
    CHECK_THROWS(apps::chsh_bound(bad, 1));  // no dimension, no span

    SpanBasis sb = make_span(NormalizationMode::Instrument, Scenario{2, 2, 2, 2}, 2, 1, 1);
    ConstraintRegime mismatched = rank_regime(sb);
    CHECK_THROWS(apps::chsh_bound(mismatched, 2));  // span was built at level 1

    SpanBasis unsat = sb;
    unsat.saturated = false;
    ConstraintRegime r = rank_regime(unsat);
    CHECK_THROWS(apps::chsh_bound(r, 1));
}

TEST_CASE("deterministic strategies") {
    auto set = apps::DeterministicStrategySet::enumerate(2, 2);
    REQUIRE(set.size() == 4);
    auto set3 = apps::DeterministicStrategySet::enumerate(3, 2);
    CHECK(set3.size() == 9);
    // all strategies distinct
    for (std::size_t i = 0; i < set.size(); ++i)
        for (std::size_t j = i + 1; j < set.size(); ++j)
            CHECK(set.strategies[i] != set.strategies[j]);
}

TEST_CASE("steering robustness") {
    const double root8 = 2.0 * std::sqrt(2.0);
    const double slope = (std::sqrt(2.0) - 1.0) / 2.0;

    // K = 2 is reachable classically: no robustness needed
    apps::AppResult at2 = apps::tsr_bound_at_chsh(2.0, nsit(), 1);
    REQUIRE(at2.status == SdpStatus::Optimal);
    CHECK(std::abs(at2.value) < 1e-5);

    apps::AppResult atmax = apps::tsr_bound_at_chsh(root8, nsit(), 1);
    REQUIRE(atmax.status == SdpStatus::Optimal);
    CHECK(std::abs(atmax.value - (root8 - 2.0) * slope) < 1e-3);

    // monotone in K
    double prev = -1.0;
    for (double k : {2.0, 2.2, 2.4, 2.6, root8}) {
        apps::AppResult r = apps::tsr_bound_at_chsh(k, nsit(), 1);
        REQUIRE(r.status == SdpStatus::Optimal);
        CHECK(r.value >= prev - 1e-6);
        prev = r.value;
    }

    // full-data variant agrees with the functional variant at the reference
    CorrelationTable data = born_probabilities(apps::chsh_reference_realization());
    apps::AppResult from_data = apps::tsr_bound(data, nsit(), 1);
    REQUIRE(from_data.status == SdpStatus::Optimal);
    CHECK(std::abs(from_data.value - atmax.value) < 1e-4);
}

TEST_CASE("steering robustness curve on a coarse grid") {
    const double slope = (std::sqrt(2.0) - 1.0) / 2.0;
    auto grid = apps::uniform_grid(2.0, 2.0 * std::sqrt(2.0), 5);
    auto pts = apps::tsr_curve(nsit(), 1, grid, 1e-8, 2);
    REQUIRE(pts.size() == 5);
    for (const auto& pt : pts) {
        REQUIRE(pt.result.status == SdpStatus::Optimal);
        CHECK(std::abs(pt.result.value - (pt.parameter - 2.0) * slope) < 1e-3);
    }
}

TEST_CASE("QRAC bounds at level 1") {
    SpanBasis s2 = make_span(NormalizationMode::PreparedState, apps::qrac_scenario(2), 2, 1, 1);
    apps::AppResult r2 = apps::qrac_bound(2, rank_regime(s2), 1);
    REQUIRE(r2.status == SdpStatus::Optimal);
    CHECK(std::abs(r2.value - 0.5 * (1.0 + 1.0 / std::sqrt(2.0))) < 1e-4);

    SpanBasis s3 = make_span(NormalizationMode::PreparedState, apps::qrac_scenario(3), 2, 1, 1);
    apps::AppResult r3 = apps::qrac_bound(3, rank_regime(s3), 1);
    REQUIRE(r3.status == SdpStatus::Optimal);
    CHECK(std::abs(r3.value - 0.5 * (1.0 + 1.0 / std::sqrt(3.0))) < 1e-4);

    CHECK(apps::qrac_classical_bound(2) == 0.75);
    CHECK_THROWS(apps::qrac_scenario(1));
}

TEST_CASE("fidelity constants") {
    apps::FidelityFunctional f;
    CHECK(std::abs(f.c * f.c - f.s * f.s - 1.0 / std::sqrt(2.0)) < 1e-15);
    CHECK(std::abs(2.0 * f.c * f.s - 1.0 / std::sqrt(2.0)) < 1e-15);
    MomentModel m = build_model(apps::qrac_scenario(2), 2, NormalizationMode::PreparedState);
    CHECK(f.coefficients(m).size() == 16);
}

TEST_CASE("self-testing fidelity") {
    SpanBasis sb = make_span(NormalizationMode::PreparedState, apps::qrac_scenario(2), 2, 1, 2);
    ConstraintRegime regime = rank_regime(sb);

    double pq = apps::qrac_quantum_bound(2);
    apps::AppResult at_pq = apps::selftest_fidelity(pq, regime, 2);
    REQUIRE(at_pq.status == SdpStatus::Optimal);
    CHECK(std::abs(at_pq.value - 1.0) < 1e-3);

    // monotone non-decreasing in the observed success probability
    double prev = -1.0;
    for (double p : {0.80, 0.82, 0.84, pq}) {
        apps::AppResult r = apps::selftest_fidelity(p, regime, 2);
        REQUIRE(r.status == SdpStatus::Optimal);
        CHECK(r.value >= prev - 1e-6);
        prev = r.value;
    }

    CHECK_THROWS(apps::selftest_fidelity(pq, regime, 1));
}

TEST_CASE("classical fidelity") {
    Realization ref = apps::qrac_reference_realization();
    double lp = apps::classical_fidelity(ref.states);
    double closed = apps::classical_fidelity_closed_form(ref.states);
    double expect = std::cos(M_PI / 8.0) * std::cos(M_PI / 8.0);
    CHECK(std::abs(lp - expect) < 1e-8);
    CHECK(std::abs(closed - expect) < 1e-15);

    // diagonal references are matched perfectly
    std::vector<MatrixXcd> diag = {MatrixXcd::Identity(2, 2), MatrixXcd::Identity(2, 2)};
    diag[0](1, 1) = 0.0;
    diag[1](0, 0) = 0.0;
    CHECK(std::abs(apps::classical_fidelity(diag) - 1.0) < 1e-12);
    CHECK(apps::classical_fidelity_closed_form(diag) == 1.0);
}
