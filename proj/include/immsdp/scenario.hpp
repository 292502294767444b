#pragma once

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace immsdp {

// Two-time measurement scenario: first-time settings x with outcomes a,
// second-time settings y with outcomes b.
struct Scenario {
    int nA = 2;
    int nX = 2;
    int nB = 2;
    int nY = 2;

    int blocks() const { return nA * nX; }

    void validate() const {
        if (nA < 1 || nX < 1 || nB < 2 || nY < 1)
            throw std::invalid_argument("Scenario: need nA,nX >= 1, nB >= 2, nY >= 1");
    }
    friend bool operator==(const Scenario&, const Scenario&) = default;
};

// Observed temporal correlations P(a,b|x,y).
class CorrelationTable {
  public:
    CorrelationTable() = default;
    explicit CorrelationTable(const Scenario& s)
        : scenario_(s), values_(static_cast<std::size_t>(s.nA) * s.nB * s.nX * s.nY, 0.0) {}

    const Scenario& scenario() const { return scenario_; }

    double& at(int a, int b, int x, int y) { return values_[index(a, b, x, y)]; }
    double at(int a, int b, int x, int y) const { return values_[index(a, b, x, y)]; }

    // Marginal of the first measurement; arrow of time makes it y-independent.
    double marginal(int a, int x, int y = 0) const {
        double s = 0.0;
        for (int b = 0; b < scenario_.nB; ++b) s += at(a, b, x, y);
        return s;
    }

    // Nonnegativity, normalization and arrow of time, at absolute tolerance.
    void validate(double tol = 1e-9) const {
        for (double v : values_) {
            if (!(v >= -tol))
                throw std::invalid_argument("CorrelationTable: negative probability");
        }
        for (int x = 0; x < scenario_.nX; ++x) {
            for (int y = 0; y < scenario_.nY; ++y) {
                double s = 0.0;
                for (int a = 0; a < scenario_.nA; ++a)
                    for (int b = 0; b < scenario_.nB; ++b) s += at(a, b, x, y);
                if (std::abs(s - 1.0) > tol)
                    throw std::invalid_argument("CorrelationTable: not normalized");
            }
            for (int a = 0; a < scenario_.nA; ++a) {
                double m0 = marginal(a, x, 0);
                for (int y = 1; y < scenario_.nY; ++y) {
                    if (std::abs(marginal(a, x, y) - m0) > tol)
                        throw std::invalid_argument("CorrelationTable: arrow of time violated");
                }
            }
        }
    }

    // Text format: comment lines start with '#'; the first data line holds
    // "nA nX nB nY"; each further line holds "a b x y p".
    static CorrelationTable parse(std::istream& in) {
        std::string line;
        Scenario s;
        bool have_header = false;
        CorrelationTable table;
        while (std::getline(in, line)) {
            std::size_t pos = line.find_first_not_of(" \t\r");
            if (pos == std::string::npos || line[pos] == '#') continue;
            std::istringstream ls(line);
            if (!have_header) {
                if (!(ls >> s.nA >> s.nX >> s.nB >> s.nY))
                    throw std::invalid_argument("CorrelationTable: bad header line");
                s.validate();
                table = CorrelationTable(s);
                have_header = true;
                continue;
            }
            int a, b, x, y;
            double p;
            if (!(ls >> a >> b >> x >> y >> p))
                throw std::invalid_argument("CorrelationTable: bad entry line: " + line);
            table.at(a, b, x, y) = p;
        }
        if (!have_header) throw std::invalid_argument("CorrelationTable: empty input");
        return table;
    }

    void serialize(std::ostream& out) const {
        out << "# a b x y p\n";
        out << scenario_.nA << ' ' << scenario_.nX << ' ' << scenario_.nB << ' '
            << scenario_.nY << '\n';
        char buf[64];
        for (int a = 0; a < scenario_.nA; ++a)
            for (int b = 0; b < scenario_.nB; ++b)
                for (int x = 0; x < scenario_.nX; ++x)
                    for (int y = 0; y < scenario_.nY; ++y) {
                        std::snprintf(buf, sizeof(buf), "%.17g", at(a, b, x, y));
                        out << a << ' ' << b << ' ' << x << ' ' << y << ' ' << buf << '\n';
                    }
    }

  private:
    std::size_t index(int a, int b, int x, int y) const {
        if (a < 0 || a >= scenario_.nA || b < 0 || b >= scenario_.nB || x < 0 ||
            x >= scenario_.nX || y < 0 || y >= scenario_.nY)
            throw std::out_of_range("CorrelationTable: index out of range");
        return ((static_cast<std::size_t>(a) * scenario_.nB + b) * scenario_.nX + x) *
                   scenario_.nY + y;
    }

    Scenario scenario_;
    std::vector<double> values_;
};

}  // namespace immsdp
