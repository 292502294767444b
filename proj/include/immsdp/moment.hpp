#pragma once

#include <array>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "affine.hpp"
#include "scenario.hpp"
#include "words.hpp"

// Symbolic instrument moment matrices: one Hermitian block per (a,x), with
// entries that are affine expressions over a shared real variable vector.
// Entry (i,j) stands for tr[ sigma_{a|x} S_j^dag S_i ]; entries whose reduced
// word coincides share a variable, and entries whose word is the identity or
// a single generator are bound to observable probabilities.

namespace immsdp {

enum class NormalizationMode {
    Instrument,     // blocks are E[I_{a|x}(rho)]; sum_a of (1,1) entries = 1 per x
    PreparedState,  // blocks are E[rho_{a,x}] with unit trace each
};

struct EntryRef {
    int block = 0;
    int i = 0;
    int j = 0;
};

struct MomentBlock {
    int a = 0;
    int x = 0;
    std::vector<std::vector<ComplexAffine>> entries;
    // Reduced-word value map, shared by all entries of the block.
    std::map<OperatorWord, ComplexAffine> word_values;
};

class MomentModel {
  public:
    Scenario scenario;
    MonomialBasis basis;
    NormalizationMode mode = NormalizationMode::Instrument;

    const std::vector<MomentBlock>& blocks() const { return blocks_; }
    int num_vars() const { return num_vars_; }
    int block_index(int a, int x) const { return a * scenario.nX + x; }

    // -1 in PreparedState mode, where the trace is the constant 1.
    int var_pax(int a, int x) const {
        check_ax(a, x);
        return mode == NormalizationMode::Instrument ? pax_[block_index(a, x)] : -1;
    }
    int var_pabxy(int a, int b, int x, int y) const {
        check_ax(a, x);
        if (b < 0 || b + 1 >= scenario.nB || y < 0 || y >= scenario.nY)
            throw std::out_of_range("MomentModel: only outcomes b < nB-1 are bound");
        int idx = ((block_index(a, x) * (scenario.nB - 1)) + b) * scenario.nY + y;
        return pabxy_[idx];
    }

    const ComplexAffine& word_value(int block, const OperatorWord& w) const {
        auto it = blocks_[block].word_values.find(w);
        if (it == blocks_[block].word_values.end())
            throw std::invalid_argument(
                "MomentModel: word not reachable at this hierarchy level");
        return it->second;
    }

    const std::string& var_name(int v) const { return var_names_[v]; }

    // Appends a block with fully unknown entries over the same basis (used for
    // the hidden-state blocks of the steering relaxation). Returns its index.
    int add_free_block(const std::string& label) {
        MomentBlock blk;
        blk.a = -1;
        blk.x = -1;
        fill_block(blk, /*bound=*/false, label);
        blocks_.push_back(std::move(blk));
        return static_cast<int>(blocks_.size()) - 1;
    }

    friend MomentModel build_model(const Scenario&, int, NormalizationMode);

  private:
    void check_ax(int a, int x) const {
        if (a < 0 || a >= scenario.nA || x < 0 || x >= scenario.nX)
            throw std::out_of_range("MomentModel: block index out of range");
    }

    int new_var(const std::string& name) {
        var_names_.push_back(name);
        return num_vars_++;
    }

    // Symbolic value of a reduced word inside one block.
    ComplexAffine make_word_value(MomentBlock& blk, const OperatorWord& w, bool bound,
                                  const std::string& label) {
        if (w.is_zero()) return ComplexAffine{};
        if (w.is_identity()) {
            if (!bound) return ComplexAffine::variable(new_var("tr[" + label + "]"));
            if (mode == NormalizationMode::PreparedState) return ComplexAffine(Complex{1.0, 0.0});
            int v = new_var("P(" + std::to_string(blk.a) + "|" + std::to_string(blk.x) + ")");
            pax_[block_index(blk.a, blk.x)] = v;
            return ComplexAffine::variable(v);
        }
        if (bound && w.length() == 1) {
            const Generator& g = w.letters()[0];
            int idx = ((block_index(blk.a, blk.x) * (scenario.nB - 1)) + g.outcome) *
                          scenario.nY + g.setting;
            int v = new_var("P(" + std::to_string(blk.a) + "," + std::to_string(g.outcome) +
                            "|" + std::to_string(blk.x) + "," + std::to_string(g.setting) + ")");
            pabxy_[idx] = v;
            return ComplexAffine::variable(v);
        }
        OperatorWord adj = adjoint(w);
        if (adj == w) return ComplexAffine::variable(new_var("u[" + label + "]"));
        // One complex unknown per {w, w^dag} class: value(key) = re + i*im.
        const OperatorWord& key = (w < adj) ? w : adj;
        auto it = blk.word_values.find(key);
        if (it == blk.word_values.end()) {
            int re = new_var("Re u[" + label + "]");
            int im = new_var("Im u[" + label + "]");
            ComplexAffine val;
            val.terms.emplace_back(re, Complex{1.0, 0.0});
            val.terms.emplace_back(im, Complex{0.0, 1.0});
            blk.word_values.emplace(key, val);
            return (w == key) ? val : val.conj();
        }
        return (w == key) ? it->second : it->second.conj();
    }

    void fill_block(MomentBlock& blk, bool bound, const std::string& label) {
        const auto& words = basis.words;
        const int n = static_cast<int>(words.size());
        blk.entries.assign(n, std::vector<ComplexAffine>(n));
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j <= i; ++j) {
                OperatorWord w = multiply(adjoint(words[j]), words[i]);
                auto it = blk.word_values.find(w);
                ComplexAffine val = (it != blk.word_values.end())
                                        ? it->second
                                        : make_word_value(blk, w, bound, label);
                blk.word_values.emplace(w, val);
                if (!w.is_zero()) blk.word_values.emplace(adjoint(w), val.conj());
                blk.entries[i][j] = val;
                if (i != j) blk.entries[j][i] = val.conj();
            }
        }
    }

    std::vector<MomentBlock> blocks_;
    std::vector<int> pax_;
    std::vector<int> pabxy_;
    std::vector<std::string> var_names_;
    int num_vars_ = 0;
};

inline MomentModel build_model(const Scenario& scenario, int level,
                               NormalizationMode mode = NormalizationMode::Instrument) {
    scenario.validate();
    if (level < 1) throw std::invalid_argument("build_model: level must be >= 1");
    MomentModel m;
    m.scenario = scenario;
    m.mode = mode;
    m.basis = build_basis(scenario_generators(scenario.nB, scenario.nY), level);
    m.pax_.assign(scenario.blocks(), -1);
    m.pabxy_.assign(static_cast<std::size_t>(scenario.blocks()) * (scenario.nB - 1) *
                        scenario.nY, -1);
    for (int a = 0; a < scenario.nA; ++a) {
        for (int x = 0; x < scenario.nX; ++x) {
            MomentBlock blk;
            blk.a = a;
            blk.x = x;
            std::string label = "I(" + std::to_string(a) + "|" + std::to_string(x) + ")";
            m.fill_block(blk, /*bound=*/true, label);
            if (m.block_index(a, x) != static_cast<int>(m.blocks_.size()))
                throw std::logic_error("build_model: block order mismatch");
            m.blocks_.push_back(std::move(blk));
        }
    }
    return m;
}

// sum_a P(a|x) = 1 for every x (Instrument mode; PreparedState traces are
// constant already).
inline std::vector<LinearConstraint> normalization_constraints(const MomentModel& m) {
    std::vector<LinearConstraint> out;
    if (m.mode != NormalizationMode::Instrument) return out;
    for (int x = 0; x < m.scenario.nX; ++x) {
        LinearConstraint c;
        for (int a = 0; a < m.scenario.nA; ++a) c.terms.emplace_back(m.var_pax(a, x), 1.0);
        c.rhs = 1.0;
        out.push_back(std::move(c));
    }
    return out;
}

// Fixes every bound entry to its observed value.
inline std::vector<LinearConstraint> bind_data(const MomentModel& m,
                                               const CorrelationTable& data) {
    if (!(data.scenario() == m.scenario))
        throw std::invalid_argument("bind_data: table shape does not match model");
    data.validate(1e-9);
    std::vector<LinearConstraint> out;
    for (int a = 0; a < m.scenario.nA; ++a) {
        for (int x = 0; x < m.scenario.nX; ++x) {
            if (m.mode == NormalizationMode::Instrument)
                out.push_back({{{m.var_pax(a, x), 1.0}}, data.marginal(a, x)});
            for (int b = 0; b + 1 < m.scenario.nB; ++b)
                for (int y = 0; y < m.scenario.nY; ++y)
                    out.push_back({{{m.var_pabxy(a, b, x, y), 1.0}}, data.at(a, b, x, y)});
        }
    }
    return out;
}

namespace detail {

inline LinearConstraint canonical_row(const RealAffine& expr) {
    LinearConstraint c = LinearConstraint::from_affine(expr, 0.0);
    if (!c.terms.empty()) {
        // fix overall scale and sign so duplicates compare equal
        double lead = c.terms.front().second;
        for (auto& [v, co] : c.terms) co /= lead;
        c.rhs /= lead;
    }
    return c;
}

}  // namespace detail

// Entrywise equalities sum_a chi_{a|x} = sum_a chi_{a|x'} for all x < x',
// real and imaginary parts separately, duplicates removed.
inline std::vector<LinearConstraint> nsit_constraints(const MomentModel& m) {
    std::vector<LinearConstraint> out;
    std::set<std::pair<std::vector<std::pair<int, double>>, double>> seen;
    const int n = static_cast<int>(m.basis.size());
    for (int x = 0; x < m.scenario.nX; ++x) {
        for (int xp = x + 1; xp < m.scenario.nX; ++xp) {
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j <= i; ++j) {
                    ComplexAffine diff;
                    for (int a = 0; a < m.scenario.nA; ++a) {
                        diff += m.blocks()[m.block_index(a, x)].entries[i][j];
                        diff -= m.blocks()[m.block_index(a, xp)].entries[i][j];
                    }
                    for (const RealAffine& part : {real_part(diff), imag_part(diff)}) {
                        LinearConstraint c = detail::canonical_row(part);
                        if (c.terms.empty()) {
                            if (std::abs(c.rhs) > 1e-12)
                                throw std::logic_error("nsit_constraints: inconsistent row");
                            continue;
                        }
                        if (seen.insert({c.terms, c.rhs}).second) out.push_back(std::move(c));
                    }
                }
            }
        }
    }
    return out;
}

// Linear functional over observable probabilities; coefficients are given on
// the full outcome range and the eliminated last outcome is expanded through
// P(a,nB-1|x,y) = P(a|x) - sum_{b<nB-1} P(a,b|x,y).
struct FunctionalCoefficient {
    int a, b, x, y;
    double weight;
};

inline RealAffine functional(const MomentModel& m,
                             const std::vector<FunctionalCoefficient>& coeffs) {
    RealAffine obj;
    for (const auto& t : coeffs) {
        if (t.a < 0 || t.a >= m.scenario.nA || t.b < 0 || t.b >= m.scenario.nB ||
            t.x < 0 || t.x >= m.scenario.nX || t.y < 0 || t.y >= m.scenario.nY)
            throw std::invalid_argument("functional: coefficient index out of range");
        if (t.weight == 0.0) continue;
        if (t.b + 1 < m.scenario.nB) {
            obj.add(m.var_pabxy(t.a, t.b, t.x, t.y), t.weight);
        } else {
            if (m.mode == NormalizationMode::Instrument)
                obj.add(m.var_pax(t.a, t.x), t.weight);
            else
                obj.constant += t.weight;
            for (int b = 0; b + 1 < m.scenario.nB; ++b)
                obj.add(m.var_pabxy(t.a, b, t.x, t.y), -t.weight);
        }
    }
    obj.compress();
    return obj;
}

// Functional over reduced-word expectation values, e.g. the fidelity
// polynomial. The result is the real part of sum coeff * <word>.
struct WordCoefficient {
    int block;
    OperatorWord word;
    Complex coeff;
};

inline RealAffine word_functional(const MomentModel& m,
                                  const std::vector<WordCoefficient>& coeffs) {
    RealAffine obj;
    for (const auto& t : coeffs) {
        ComplexAffine val = m.word_value(t.block, t.word);
        val *= t.coeff;
        obj += real_part(val);
    }
    obj.compress();
    return obj;
}

}  // namespace immsdp
