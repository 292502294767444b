#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "immsdp/apps.hpp"
#include "immsdp/moment.hpp"
#include "immsdp/realization.hpp"

using namespace immsdp;

namespace {

CorrelationTable uniform_table(const Scenario& sc) {
    CorrelationTable t(sc);
    double p = 1.0 / (sc.nA * sc.nB);
    for (int a = 0; a < sc.nA; ++a)
        for (int b = 0; b < sc.nB; ++b)
            for (int x = 0; x < sc.nX; ++x)
                for (int y = 0; y < sc.nY; ++y) t.at(a, b, x, y) = p;
    return t;
}

}  // namespace

TEST_CASE("block shapes and shared variables at level 1") {
    MomentModel m = build_model(Scenario{2, 2, 2, 2}, 1);
    REQUIRE(m.blocks().size() == 4);
    REQUIRE(m.basis.size() == 3);
    for (const MomentBlock& blk : m.blocks()) {
        REQUIRE(blk.entries.size() == 3);
        // E^2 = E makes the diagonal repeat the first column
        for (int i = 1; i < 3; ++i) {
            REQUIRE(blk.entries[i][i].terms.size() == 1);
            CHECK(blk.entries[i][i].terms == blk.entries[i][0].terms);
        }
        // (1,2) entry is an unknown complex pair, mirrored by conjugation
        CHECK(blk.entries[1][2].terms.size() == 2);
        CHECK(blk.entries[1][2].terms[0].first == blk.entries[2][1].terms[0].first);
        CHECK(blk.entries[1][2].terms[1].second ==
              -blk.entries[2][1].terms[1].second);
    }
    // per block: P(a|x), two P(a,b|x,y), one complex pair
    CHECK(m.num_vars() == 4 * 5);
}

TEST_CASE("level 5 matrices are 11x11") {
    MomentModel m = build_model(Scenario{2, 2, 2, 2}, 5);
    CHECK(m.basis.size() == 11);
    CHECK(m.blocks().size() == 4);
    CHECK(m.blocks()[0].entries.size() == 11);
}

TEST_CASE("entries are Hermitian as affine expressions") {
    MomentModel m = build_model(Scenario{2, 3, 2, 2}, 2);
    const int n = static_cast<int>(m.basis.size());
    for (const MomentBlock& blk : m.blocks())
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                ComplexAffine d = blk.entries[i][j];
                d -= blk.entries[j][i].conj();
                d.compress(1e-15);
                CHECK(d.terms.empty());
                CHECK(std::abs(d.constant) < 1e-15);
            }
}

TEST_CASE("symbolic entries reproduce explicit realizations") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        Realization r = sample_realization(3, 0, Scenario{2, 2, 2, 2}, seed);
        MomentModel m = build_model(r.scenario, 3);
        Eigen::VectorXd x = testing::assign_from_realization(m, r);
        std::vector<MatrixXcd> numeric = numeric_moments(r, m.basis);
        const int n = static_cast<int>(m.basis.size());
        for (int blk = 0; blk < r.scenario.blocks(); ++blk)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    CHECK(std::abs(m.blocks()[blk].entries[i][j].eval(x) -
                                   numeric[blk](i, j)) < 1e-10);
    }
}

TEST_CASE("normalization constraints") {
    MomentModel m = build_model(Scenario{2, 2, 2, 2}, 1);
    auto cons = normalization_constraints(m);
    REQUIRE(cons.size() == 2);
    for (const auto& c : cons) {
        CHECK(c.rhs == 1.0);
        CHECK(c.terms.size() == 2);
    }
    MomentModel p = build_model(Scenario{2, 2, 2, 2}, 1, NormalizationMode::PreparedState);
    CHECK(normalization_constraints(p).empty());
}

TEST_CASE("bind_data on the uniform table") {
    MomentModel m = build_model(Scenario{2, 2, 2, 2}, 1);
    auto cons = bind_data(m, uniform_table(m.scenario));
    // per block: one marginal binding plus nB-1 per y
    REQUIRE(cons.size() == 4 * 3);
    for (const auto& c : cons) {
        REQUIRE(c.terms.size() == 1);
        CHECK((std::abs(c.rhs - 0.5) < 1e-12 || std::abs(c.rhs - 0.25) < 1e-12));
    }
}

TEST_CASE("bind_data rejects arrow-of-time violations") {
    CorrelationTable t = uniform_table(Scenario{2, 2, 2, 2});
    t.at(0, 0, 0, 0) = 0.5;
    t.at(1, 0, 0, 0) = 0.0;  // still normalized, but the a-marginal depends on y
    MomentModel m = build_model(t.scenario(), 1);
    CHECK_THROWS(bind_data(m, t));
}

TEST_CASE("bind_data rejects shape mismatch and negative entries") {
    MomentModel m = build_model(Scenario{2, 2, 2, 2}, 1);
    CHECK_THROWS(bind_data(m, uniform_table(Scenario{2, 2, 2, 3})));
    CorrelationTable t = uniform_table(Scenario{2, 2, 2, 2});
    t.at(0, 0, 0, 0) = -0.1;
    CHECK_THROWS(bind_data(m, t));
}

TEST_CASE("NSIT constraint count and satisfaction") {
    MomentModel m = build_model(Scenario{2, 2, 2, 2}, 1);
    auto cons = nsit_constraints(m);
    CHECK(cons.size() == 5);

    // an x-independent instrument satisfies NSIT; its assignment must too
    Realization r = sample_realization(2, 0, Scenario{2, 2, 2, 2}, 5);
    r.kraus[1] = r.kraus[0];
    Eigen::VectorXd x = testing::assign_from_realization(m, r);
    for (const auto& c : cons) {
        double v = -c.rhs;
        for (const auto& [var, w] : c.terms) v += w * x[var];
        CHECK(std::abs(v) < 1e-10);
    }
}

TEST_CASE("functional expands the eliminated outcome") {
    MomentModel m = build_model(Scenario{2, 2, 2, 2}, 1);
    Realization r = apps::chsh_reference_realization();
    Eigen::VectorXd x = testing::assign_from_realization(m, r);
    RealAffine k = functional(m, apps::chsh_coefficients());
    CHECK(std::abs(k.eval(x) - 2.0 * std::sqrt(2.0)) < 1e-10);
    CHECK_THROWS(functional(m, {{0, 0, 0, 5, 1.0}}));
}

TEST_CASE("word functional evaluates the fidelity polynomial") {
    MomentModel m = build_model(apps::qrac_scenario(2), 2, NormalizationMode::PreparedState);
    Realization ref = apps::qrac_reference_realization();
    Eigen::VectorXd x = testing::assign_from_realization(m, ref);
    apps::FidelityFunctional f;
    RealAffine obj = word_functional(m, f.coefficients(m));
    CHECK(std::abs(obj.eval(x) + f.constant() - 1.0) < 1e-10);

    // words longer than the level are rejected
    MomentModel shallow =
        build_model(apps::qrac_scenario(2), 1, NormalizationMode::PreparedState);
    CHECK_THROWS(word_functional(shallow, f.coefficients(m)));
}

TEST_CASE("correlation table round trip") {
    CorrelationTable t = born_probabilities(apps::chsh_reference_realization());
    std::stringstream ss;
    t.serialize(ss);
    CorrelationTable back = CorrelationTable::parse(ss);
    REQUIRE(back.scenario() == t.scenario());
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int x = 0; x < 2; ++x)
                for (int y = 0; y < 2; ++y)
                    CHECK(back.at(a, b, x, y) == t.at(a, b, x, y));
}
