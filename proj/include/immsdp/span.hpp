#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "moment.hpp"
#include "realization.hpp"

// Sampled-span characterization of the dimension- and rank-restricted moment
// matrix sets: moment matrices of random d-dimensional realizations are
// stacked into real vectors and orthonormalized until the numerical rank
// saturates. Membership in the resulting linear span, combined with the PSD
// constraints, realizes the dimension(+rank) regimes as linear equalities.

namespace immsdp {

// Real stacking layout of a Hermitian block family: per block, upper
// triangle, real part for i <= j and imaginary part for i < j.
inline int stacked_dimension(int num_blocks, int block_size) {
    return num_blocks * block_size * block_size;
}

inline Eigen::VectorXd stack_moments(const std::vector<MatrixXcd>& blocks) {
    const int n = static_cast<int>(blocks.front().rows());
    Eigen::VectorXd v(stacked_dimension(static_cast<int>(blocks.size()), n));
    int idx = 0;
    for (const MatrixXcd& blk : blocks)
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                v[idx++] = blk(i, j).real();
                if (j > i) v[idx++] = blk(i, j).imag();
            }
    v.conservativeResize(idx);
    return v;
}

inline std::vector<RealAffine> stack_symbolic(const MomentModel& model,
                                              const std::vector<int>& block_ids) {
    std::vector<RealAffine> out;
    const int n = static_cast<int>(model.basis.size());
    for (int bi : block_ids) {
        const MomentBlock& blk = model.blocks()[bi];
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                out.push_back(real_part(blk.entries[i][j]));
                if (j > i) out.push_back(imag_part(blk.entries[i][j]));
            }
    }
    return out;
}

struct SpanBasis {
    NormalizationMode mode = NormalizationMode::Instrument;
    Scenario scenario;
    int dim = 2;
    int rank_k = 0;  // 0 = unconstrained
    int level = 1;
    std::uint64_t seed = 0;
    int batch_size = 50;
    int samples = 0;
    bool saturated = false;
    std::vector<int> saturation_trace;  // rank after each batch
    int ambient = 0;
    Eigen::MatrixXd basis;  // ambient x rank, orthonormal columns

    int rank() const { return static_cast<int>(basis.cols()); }

    std::string metadata_line() const {
        std::ostringstream os;
        os << (mode == NormalizationMode::Instrument ? "instrument" : "prepare") << ' '
           << scenario.nA << ' ' << scenario.nX << ' ' << scenario.nB << ' '
           << scenario.nY << ' ' << dim << ' ' << rank_k << ' ' << level << ' ' << seed
           << ' ' << batch_size;
        return os.str();
    }

    // Content address used by the CLI cache and CSV metadata.
    std::string id() const {
        std::string s = metadata_line();
        std::uint64_t h = 1469598103934665603ull;
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ull;
        }
        char buf[17];
        std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
        return buf;
    }

    // Residual of a stacked vector against the span (for membership checks).
    double residual(const Eigen::VectorXd& v) const {
        Eigen::VectorXd r = v - basis * (basis.transpose() * v);
        return r.norm() / std::max(1.0, v.norm());
    }
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

}  // namespace detail

struct SpanParams {
    NormalizationMode mode = NormalizationMode::Instrument;
    int dim = 2;
    int rank_k = 0;  // 0 = unconstrained
    Scenario scenario;
    int level = 1;
    std::uint64_t seed = 1;
    int batch_size = 50;
    int max_batches = 40;
    double rank_tol = 1e-8;
    int stable_batches = 3;  // saturation criterion
};

inline SpanBasis build_span(const SpanParams& p) {
    MonomialBasis basis = build_basis(scenario_generators(p.scenario.nB, p.scenario.nY),
                                      p.level);
    SpanBasis sb;
    sb.mode = p.mode;
    sb.scenario = p.scenario;
    sb.dim = p.dim;
    sb.rank_k = p.rank_k;
    sb.level = p.level;
    sb.seed = p.seed;
    sb.batch_size = p.batch_size;

    std::vector<Eigen::VectorXd> cols;
    int stable = 0;
    for (int batch = 0; batch < p.max_batches; ++batch) {
        int before = static_cast<int>(cols.size());
        for (int s = 0; s < p.batch_size; ++s) {
            std::uint64_t sample_seed =
                detail::splitmix64(p.seed ^ detail::splitmix64(
                    static_cast<std::uint64_t>(batch) * p.batch_size + s + 1));
            Realization r = (p.mode == NormalizationMode::Instrument)
                                ? sample_realization(p.dim, p.rank_k, p.scenario, sample_seed)
                                : sample_prepared_states(p.dim, p.rank_k, p.scenario,
                                                         sample_seed);
            Eigen::VectorXd v = stack_moments(numeric_moments(r, basis));
            if (sb.ambient == 0) sb.ambient = static_cast<int>(v.size());
            // modified Gram-Schmidt, applied twice for orthogonality
            Eigen::VectorXd w = v;
            for (int pass = 0; pass < 2; ++pass)
                for (const Eigen::VectorXd& q : cols) w -= q.dot(w) * q;
            if (w.norm() > p.rank_tol * std::max(1.0, v.norm())) cols.push_back(w.normalized());
            ++sb.samples;
        }
        sb.saturation_trace.push_back(static_cast<int>(cols.size()));
        stable = (static_cast<int>(cols.size()) == before) ? stable + 1 : 0;
        if (stable >= p.stable_batches || static_cast<int>(cols.size()) == sb.ambient) {
            sb.saturated = true;
            break;
        }
    }
    sb.basis.resize(sb.ambient, static_cast<int>(cols.size()));
    for (int c = 0; c < sb.basis.cols(); ++c) sb.basis.col(c) = cols[c];
    return sb;
}

// Linear equalities forcing the stacked block family into the sampled span:
// one row per orthonormal complement direction.
inline std::vector<LinearConstraint> span_constraints(const SpanBasis& sb,
                                                      const MomentModel& model,
                                                      const std::vector<int>& block_ids) {
    std::vector<RealAffine> stacked = stack_symbolic(model, block_ids);
    if (static_cast<int>(stacked.size()) != sb.ambient)
        throw std::invalid_argument("span_constraints: ambient dimension mismatch");
    if (sb.rank() == sb.ambient) return {};
    Eigen::MatrixXd complement;
    if (sb.rank() == 0) {
        complement = Eigen::MatrixXd::Identity(sb.ambient, sb.ambient);
    } else {
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(sb.basis);
        Eigen::MatrixXd Qfull = qr.householderQ();
        complement = Qfull.rightCols(sb.ambient - sb.rank());
    }
    std::vector<LinearConstraint> out;
    for (int c = 0; c < complement.cols(); ++c) {
        RealAffine row;
        for (int p = 0; p < sb.ambient; ++p) {
            double w = complement(p, c);
            if (std::abs(w) < 1e-13) continue;
            RealAffine term = stacked[p];
            term *= w;
            row += term;
        }
        row.compress(1e-13);
        if (row.terms.empty() && std::abs(row.constant) < 1e-11) continue;
        out.push_back(LinearConstraint::from_affine(row, 0.0));
    }
    return out;
}

inline std::vector<int> model_family_blocks(const MomentModel& model) {
    std::vector<int> ids(model.scenario.blocks());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
    return ids;
}

// Versioned text artifact so expensive spans can be reused across runs.
inline void save_span(const SpanBasis& sb, std::ostream& out) {
    out << "IMMSPAN 1\n";
    out << "meta " << sb.metadata_line() << "\n";
    out << "samples " << sb.samples << "\n";
    out << "saturated " << (sb.saturated ? 1 : 0) << "\n";
    out << "trace";
    for (int t : sb.saturation_trace) out << ' ' << t;
    out << "\n";
    out << "ambient " << sb.ambient << "\n";
    out << "rank " << sb.rank() << "\n";
    char buf[32];
    for (int c = 0; c < sb.rank(); ++c) {
        for (int p = 0; p < sb.ambient; ++p) {
            std::snprintf(buf, sizeof(buf), "%.17g", sb.basis(p, c));
            out << buf << (p + 1 == sb.ambient ? '\n' : ' ');
        }
    }
}

inline SpanBasis load_span(std::istream& in) {
    std::string tok;
    int version;
    in >> tok >> version;
    if (tok != "IMMSPAN" || version != 1)
        throw std::invalid_argument("load_span: unsupported format");
    SpanBasis sb;
    std::string mode;
    in >> tok >> mode >> sb.scenario.nA >> sb.scenario.nX >> sb.scenario.nB >>
        sb.scenario.nY >> sb.dim >> sb.rank_k >> sb.level >> sb.seed >> sb.batch_size;
    sb.mode = (mode == "instrument") ? NormalizationMode::Instrument
                                     : NormalizationMode::PreparedState;
    in >> tok >> sb.samples;
    int sat;
    in >> tok >> sat;
    sb.saturated = (sat != 0);
    in >> tok;  // "trace"
    {
        std::string rest;
        std::getline(in, rest);
        std::istringstream ts(rest);
        int t;
        while (ts >> t) sb.saturation_trace.push_back(t);
    }
    int rank;
    in >> tok >> sb.ambient >> tok >> rank;
    sb.basis.resize(sb.ambient, rank);
    for (int c = 0; c < rank; ++c)
        for (int p = 0; p < sb.ambient; ++p) in >> sb.basis(p, c);
    if (!in) throw std::invalid_argument("load_span: truncated artifact");
    return sb;
}

}  // namespace immsdp
