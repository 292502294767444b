#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <utility>
#include <vector>

namespace immsdp {

using Complex = std::complex<double>;

// Complex-valued affine expression over a shared real variable vector.
struct ComplexAffine {
    Complex constant{0.0, 0.0};
    std::vector<std::pair<int, Complex>> terms;  // (variable, coefficient)

    ComplexAffine() = default;
    explicit ComplexAffine(Complex c) : constant(c) {}

    static ComplexAffine variable(int v, Complex coeff = Complex{1.0, 0.0}) {
        ComplexAffine a;
        a.terms.emplace_back(v, coeff);
        return a;
    }

    ComplexAffine& operator+=(const ComplexAffine& o) {
        constant += o.constant;
        terms.insert(terms.end(), o.terms.begin(), o.terms.end());
        return *this;
    }
    ComplexAffine& operator-=(const ComplexAffine& o) {
        constant -= o.constant;
        for (const auto& [v, c] : o.terms) terms.emplace_back(v, -c);
        return *this;
    }
    ComplexAffine& operator*=(Complex s) {
        constant *= s;
        for (auto& [v, c] : terms) c *= s;
        return *this;
    }

    ComplexAffine conj() const {
        ComplexAffine a;
        a.constant = std::conj(constant);
        a.terms.reserve(terms.size());
        for (const auto& [v, c] : terms) a.terms.emplace_back(v, std::conj(c));
        return a;
    }

    // Merges duplicate variables and drops negligible coefficients.
    void compress(double tol = 0.0) {
        std::sort(terms.begin(), terms.end(),
                  [](const auto& l, const auto& r) { return l.first < r.first; });
        std::vector<std::pair<int, Complex>> out;
        for (const auto& [v, c] : terms) {
            if (!out.empty() && out.back().first == v)
                out.back().second += c;
            else
                out.emplace_back(v, c);
        }
        std::erase_if(out, [tol](const auto& t) { return std::abs(t.second) <= tol; });
        terms = std::move(out);
    }

    template <typename Vec>
    Complex eval(const Vec& x) const {
        Complex s = constant;
        for (const auto& [v, c] : terms) s += c * x[v];
        return s;
    }
};

// Real-valued affine expression.
struct RealAffine {
    double constant = 0.0;
    std::vector<std::pair<int, double>> terms;

    RealAffine& operator+=(const RealAffine& o) {
        constant += o.constant;
        terms.insert(terms.end(), o.terms.begin(), o.terms.end());
        return *this;
    }
    RealAffine& operator*=(double s) {
        constant *= s;
        for (auto& [v, c] : terms) c *= s;
        return *this;
    }
    void add(int v, double c) { terms.emplace_back(v, c); }

    void compress(double tol = 0.0) {
        std::sort(terms.begin(), terms.end(),
                  [](const auto& l, const auto& r) { return l.first < r.first; });
        std::vector<std::pair<int, double>> out;
        for (const auto& [v, c] : terms) {
            if (!out.empty() && out.back().first == v)
                out.back().second += c;
            else
                out.emplace_back(v, c);
        }
        std::erase_if(out, [tol](const auto& t) { return std::abs(t.second) <= tol; });
        terms = std::move(out);
    }

    template <typename Vec>
    double eval(const Vec& x) const {
        double s = constant;
        for (const auto& [v, c] : terms) s += c * x[v];
        return s;
    }
};

inline RealAffine real_part(const ComplexAffine& a) {
    RealAffine r;
    r.constant = a.constant.real();
    for (const auto& [v, c] : a.terms) r.add(v, c.real());
    return r;
}

inline RealAffine imag_part(const ComplexAffine& a) {
    RealAffine r;
    r.constant = a.constant.imag();
    for (const auto& [v, c] : a.terms) r.add(v, c.imag());
    return r;
}

// Linear equality sum_i coeff_i x_i = rhs.
struct LinearConstraint {
    std::vector<std::pair<int, double>> terms;
    double rhs = 0.0;

    static LinearConstraint from_affine(const RealAffine& a, double value) {
        RealAffine c = a;
        c.compress(1e-14);
        return LinearConstraint{c.terms, value - c.constant};
    }
    friend bool operator==(const LinearConstraint&, const LinearConstraint&) = default;
};

}  // namespace immsdp
