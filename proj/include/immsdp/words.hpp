#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <vector>

// Word algebra over the second-time measurement projectors E_{b|y}.
//
// Generators are projectors, so products reduce under two rules:
//   E_{b|y} E_{b|y}  = E_{b|y}          (idempotence)
//   E_{b|y} E_{b'|y} = 0  for b != b'   (orthogonality within a setting)
// Only outcomes b < nB-1 appear as generators; the last outcome of every
// setting is eliminated through sum_b E_{b|y} = 1.

namespace immsdp {

struct Generator {
    int outcome = 0;  // b
    int setting = 0;  // y

    friend auto operator<=>(const Generator& l, const Generator& r) {
        // graded-lex order keys on (y, b)
        if (auto c = l.setting <=> r.setting; c != 0) return c;
        return l.outcome <=> r.outcome;
    }
    friend bool operator==(const Generator&, const Generator&) = default;
};

class OperatorWord {
  public:
    OperatorWord() = default;  // identity

    static OperatorWord identity() { return OperatorWord{}; }

    static OperatorWord zero() {
        OperatorWord w;
        w.zero_ = true;
        return w;
    }

    // Canonical reduction of an arbitrary letter sequence.
    static OperatorWord reduce(const std::vector<Generator>& letters) {
        OperatorWord w;
        for (const Generator& g : letters) {
            if (!w.push_back(g)) return zero();
        }
        return w;
    }

    bool is_zero() const { return zero_; }
    bool is_identity() const { return !zero_ && letters_.empty(); }
    std::size_t length() const { return letters_.size(); }
    const std::vector<Generator>& letters() const { return letters_; }

    // Appends one generator, keeping canonical form. Returns false when the
    // word annihilates.
    bool push_back(const Generator& g) {
        if (zero_) return false;
        if (!letters_.empty() && letters_.back().setting == g.setting) {
            if (letters_.back().outcome == g.outcome) return true;  // E^2 = E
            zero_ = true;
            letters_.clear();
            return false;
        }
        letters_.push_back(g);
        return true;
    }

    friend bool operator==(const OperatorWord& l, const OperatorWord& r) {
        return l.zero_ == r.zero_ && l.letters_ == r.letters_;
    }

    // Graded lexicographic; Zero sorts after everything.
    friend bool operator<(const OperatorWord& l, const OperatorWord& r) {
        if (l.zero_ != r.zero_) return r.zero_;
        if (l.letters_.size() != r.letters_.size())
            return l.letters_.size() < r.letters_.size();
        return std::lexicographical_compare(l.letters_.begin(), l.letters_.end(),
                                            r.letters_.begin(), r.letters_.end());
    }

  private:
    std::vector<Generator> letters_;
    bool zero_ = false;
};

inline OperatorWord multiply(const OperatorWord& left, const OperatorWord& right) {
    if (left.is_zero() || right.is_zero()) return OperatorWord::zero();
    OperatorWord w = left;
    for (const Generator& g : right.letters()) {
        if (!w.push_back(g)) return OperatorWord::zero();
    }
    return w;
}

// Generators are self-adjoint projectors, so the adjoint is letter reversal.
inline OperatorWord adjoint(const OperatorWord& w) {
    if (w.is_zero()) return OperatorWord::zero();
    std::vector<Generator> rev(w.letters().rbegin(), w.letters().rend());
    return OperatorWord::reduce(rev);
}

struct MonomialBasis {
    int level = 0;
    std::vector<OperatorWord> words;  // identity first, graded-lex order

    std::size_t size() const { return words.size(); }
};

// All distinct canonical nonzero words of length <= level, identity first.
inline MonomialBasis build_basis(const std::vector<Generator>& generators, int level) {
    if (level < 1) throw std::invalid_argument("build_basis: level must be >= 1");
    if (generators.empty()) throw std::invalid_argument("build_basis: no generators");

    std::vector<Generator> gens = generators;
    std::sort(gens.begin(), gens.end());
    gens.erase(std::unique(gens.begin(), gens.end()), gens.end());

    MonomialBasis basis;
    basis.level = level;
    basis.words.push_back(OperatorWord::identity());

    std::vector<OperatorWord> frontier = {OperatorWord::identity()};
    for (int len = 1; len <= level; ++len) {
        std::vector<OperatorWord> next;
        std::set<OperatorWord> seen;
        for (const OperatorWord& w : frontier) {
            for (const Generator& g : gens) {
                OperatorWord e = w;
                if (!e.push_back(g)) continue;
                if (e.length() != static_cast<std::size_t>(len)) continue;
                if (seen.insert(e).second) next.push_back(e);
            }
        }
        std::sort(next.begin(), next.end());
        basis.words.insert(basis.words.end(), next.begin(), next.end());
        frontier = std::move(next);
    }
    return basis;
}

// Generator set for a temporal scenario: one projector per kept outcome
// b in [0, nB-2] of every second-time setting.
inline std::vector<Generator> scenario_generators(int nB, int nY) {
    if (nB < 2 || nY < 1) throw std::invalid_argument("scenario_generators: need nB >= 2, nY >= 1");
    std::vector<Generator> gens;
    for (int y = 0; y < nY; ++y)
        for (int b = 0; b + 1 < nB; ++b) gens.push_back({b, y});
    return gens;
}

}  // namespace immsdp
