// Command line front end: runs the applications, manages span artifacts and
// emits reproducible CSV plus a run manifest.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "immsdp/apps.hpp"
#include "immsdp/span.hpp"

namespace fs = std::filesystem;
using namespace immsdp;

namespace {

std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

struct CsvRow {
    std::string application;
    std::string regime;
    int level = 0;
    double parameter = 0.0;
    double value = 0.0;
    double gap = 0.0;
    std::string status;
    std::string span_id = "-";
    std::uint64_t seed = 0;
};

struct RunOutput {
    std::vector<CsvRow> rows;
    std::vector<std::string> manifest;
    bool all_optimal = true;

    void add(const CsvRow& row) {
        rows.push_back(row);
        if (row.status != "optimal" && row.status != "ok") all_optimal = false;
    }
};

void write_csv(const RunOutput& out, std::ostream& os) {
    os << "application,regime,level,parameter,value,gap,status,span_id,seed\n";
    for (const CsvRow& r : out.rows)
        os << r.application << ',' << r.regime << ',' << r.level << ','
           << fmt9(r.parameter) << ',' << fmt9(r.value) << ',' << fmt9(r.gap) << ','
           << r.status << ',' << r.span_id << ',' << r.seed << '\n';
}

struct Options {
    std::string regime = "di";
    int dim = 0;
    int rank = 0;
    int level = 1;
    std::uint64_t seed = 1;
    double tol = 1e-8;
    std::string out_path;
    std::string span_dir = "spans";
    std::string data_path;
    double chsh_value = std::nan("");
    double grid_min = 2.0;
    double grid_max = 2.0 * std::sqrt(2.0);
    int grid_points = 41;
    int n = 2;
    double pobs = std::nan("");
    int span_batch = 50;
    bool prepare_mode = false;
};

int env_workers() {
    const char* w = std::getenv("IMMSDP_WORKERS");
    if (!w) return 0;
    return std::atoi(w);
}

// Span cache: artifacts addressed by the hash of their defining metadata.
SpanBasis obtain_span(const Options& opt, const Scenario& sc, NormalizationMode mode,
                      RunOutput& run) {
    SpanParams p;
    p.mode = mode;
    p.dim = opt.dim;
    p.rank_k = (opt.regime == "dim-rank") ? opt.rank : 0;
    p.scenario = sc;
    p.level = opt.level;
    p.seed = opt.seed;
    p.batch_size = opt.span_batch;

    SpanBasis key;
    key.mode = p.mode;
    key.scenario = sc;
    key.dim = p.dim;
    key.rank_k = p.rank_k;
    key.level = p.level;
    key.seed = p.seed;
    key.batch_size = p.batch_size;
    fs::path path = fs::path(opt.span_dir) / (key.id() + ".span");
    if (fs::exists(path)) {
        std::ifstream in(path);
        SpanBasis sb = load_span(in);
        if (sb.id() != key.id()) throw std::runtime_error("span cache: stale artifact " + path.string());
        run.manifest.push_back("span reused: " + path.string() + " rank " +
                               std::to_string(sb.rank()));
        return sb;
    }
    SpanBasis sb = build_span(p);
    fs::create_directories(opt.span_dir);
    std::ofstream os(path);
    save_span(sb, os);
    run.manifest.push_back("span built: " + path.string() + " rank " +
                           std::to_string(sb.rank()) + " samples " +
                           std::to_string(sb.samples) +
                           (sb.saturated ? " saturated" : " NOT saturated"));
    return sb;
}

apps::ConstraintRegime make_regime(const Options& opt, const SpanBasis* span) {
    apps::ConstraintRegime r;
    if (opt.regime == "di") r.tag = apps::ConstraintRegime::Tag::DI;
    else if (opt.regime == "dim") r.tag = apps::ConstraintRegime::Tag::DIDim;
    else if (opt.regime == "dim-rank") r.tag = apps::ConstraintRegime::Tag::DIDimRank;
    else if (opt.regime == "nsit") r.tag = apps::ConstraintRegime::Tag::NSIT;
    else throw CLI::ValidationError("--regime", "unknown regime " + opt.regime);
    r.d = opt.dim;
    r.k = opt.rank;
    r.span = span;
    if (r.needs_span()) {
        if (opt.dim < 1)
            throw CLI::ValidationError("--dim", "regime " + opt.regime + " requires --dim");
        if (r.tag == apps::ConstraintRegime::Tag::DIDimRank && opt.rank < 1)
            throw CLI::ValidationError("--rank", "regime dim-rank requires --rank");
    }
    return r;
}

void add_common(CLI::App* cmd, Options& opt, bool with_span = true) {
    cmd->configurable(true);
    cmd->add_option("--regime", opt.regime, "di, dim, dim-rank or nsit");
    cmd->add_option("--level", opt.level, "hierarchy level");
    cmd->add_option("--seed", opt.seed, "seed for span sampling");
    cmd->add_option("--tol", opt.tol, "solver tolerance");
    cmd->add_option("--out", opt.out_path, "CSV output path (default stdout)");
    if (with_span) {
        cmd->add_option("--dim", opt.dim, "system dimension d (dim regimes)");
        cmd->add_option("--rank", opt.rank, "POVM element rank k (dim-rank regime)");
        cmd->add_option("--span-dir", opt.span_dir, "span artifact cache directory");
        cmd->add_option("--span-batch", opt.span_batch, "span sampling batch size");
    }
}

std::string regime_label(const Options& opt) {
    std::ostringstream os;
    os << opt.regime;
    if (opt.regime == "dim") os << "(d=" << opt.dim << ")";
    if (opt.regime == "dim-rank") os << "(d=" << opt.dim << ";k=" << opt.rank << ")";
    return os.str();
}

CsvRow result_row(const std::string& app, const Options& opt, double parameter,
                  const apps::AppResult& res, const std::string& span_id) {
    CsvRow row;
    row.application = app;
    row.regime = regime_label(opt);
    row.level = opt.level;
    row.parameter = parameter;
    row.value = res.value;
    row.gap = res.gap;
    row.status = to_string(res.status);
    row.span_id = span_id;
    row.seed = opt.seed;
    return row;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Temporal correlation bounds from instrument moment matrices"};
    app.require_subcommand(1);
    app.set_config("--config", "",
                   "config file with a [subcommand] section of key=value options");

    Options opt;
    auto* chsh = app.add_subcommand("chsh", "temporal CHSH upper bound");
    add_common(chsh, opt);

    auto* tsr = app.add_subcommand("tsr", "temporal steering robustness lower bound");
    add_common(tsr, opt);
    tsr->add_option("--data", opt.data_path, "correlation table file");
    tsr->add_option("--chsh", opt.chsh_value, "impose a CHSH value instead of full data");

    auto* curve = app.add_subcommand("tsr-curve", "robustness curve over CHSH values");
    add_common(curve, opt);
    curve->add_option("--grid-min", opt.grid_min, "first CHSH value");
    curve->add_option("--grid-max", opt.grid_max, "last CHSH value");
    curve->add_option("--grid-points", opt.grid_points, "number of grid points");

    auto* qrac = app.add_subcommand("qrac", "n->1 random access code bound");
    add_common(qrac, opt);
    qrac->add_option("--n", opt.n, "number of encoded bits (2 or 3)");

    auto* selftest = app.add_subcommand("selftest", "self-testing fidelity lower bound");
    add_common(selftest, opt);
    selftest->add_option("--pobs", opt.pobs, "observed 2->1 success probability");

    auto* cfid = app.add_subcommand("classical-fidelity",
                                    "classical fidelity baseline of the 2->1 references");
    add_common(cfid, opt, /*with_span=*/false);

    auto* sspan = app.add_subcommand("sample-span", "pre-build a span artifact");
    add_common(sspan, opt);
    sspan->add_flag("--prepare", opt.prepare_mode, "prepared-state family instead of instruments");
    Scenario span_scenario{2, 2, 2, 2};
    sspan->add_option("--scenario-nA", span_scenario.nA, "first-time outcomes");
    sspan->add_option("--scenario-nX", span_scenario.nX, "first-time settings");
    sspan->add_option("--scenario-nB", span_scenario.nB, "second-time outcomes");
    sspan->add_option("--scenario-nY", span_scenario.nY, "second-time settings");

    auto* verify = app.add_subcommand("verify-oracle",
                                      "cross-check bundled reference realizations");
    verify->add_option("--out", opt.out_path, "CSV output path (default stdout)");

    CLI11_PARSE(app, argc, argv);

    auto t0 = std::chrono::steady_clock::now();
    RunOutput run;
    run.manifest.push_back("command: " + app.get_subcommands().front()->get_name());

    try {
        if (chsh->parsed()) {
            SpanBasis sb;
            std::string span_id = "-";
            apps::ConstraintRegime regime = make_regime(opt, nullptr);
            if (regime.needs_span()) {
                sb = obtain_span(opt, Scenario{2, 2, 2, 2}, NormalizationMode::Instrument, run);
                span_id = sb.id();
                regime.span = &sb;
            }
            apps::AppResult res = apps::chsh_bound(regime, opt.level, opt.tol);
            run.add(result_row("chsh", opt, 0.0, res, span_id));
        } else if (tsr->parsed()) {
            SpanBasis sb;
            std::string span_id = "-";
            apps::ConstraintRegime regime = make_regime(opt, nullptr);
            Scenario sc{2, 2, 2, 2};
            CorrelationTable data;
            bool have_data = !opt.data_path.empty();
            if (have_data) {
                std::ifstream in(opt.data_path);
                if (!in) throw std::runtime_error("cannot open " + opt.data_path);
                data = CorrelationTable::parse(in);
                sc = data.scenario();
            } else if (std::isnan(opt.chsh_value)) {
                throw CLI::ValidationError("tsr", "needs --data or --chsh");
            }
            if (regime.needs_span()) {
                sb = obtain_span(opt, sc, NormalizationMode::Instrument, run);
                span_id = sb.id();
                regime.span = &sb;
            }
            apps::AppResult res = have_data
                ? apps::tsr_bound(data, regime, opt.level, opt.tol)
                : apps::tsr_bound_at_chsh(opt.chsh_value, regime, opt.level, opt.tol);
            run.add(result_row("tsr", opt, have_data ? 0.0 : opt.chsh_value, res, span_id));
        } else if (curve->parsed()) {
            SpanBasis sb;
            std::string span_id = "-";
            apps::ConstraintRegime regime = make_regime(opt, nullptr);
            if (regime.needs_span()) {
                sb = obtain_span(opt, Scenario{2, 2, 2, 2}, NormalizationMode::Instrument, run);
                span_id = sb.id();
                regime.span = &sb;
            }
            auto grid = apps::uniform_grid(opt.grid_min, opt.grid_max, opt.grid_points);
            auto points = apps::tsr_curve(regime, opt.level, grid, opt.tol, env_workers());
            for (const auto& pt : points)
                run.add(result_row("tsr-curve", opt, pt.parameter, pt.result, span_id));
        } else if (qrac->parsed()) {
            SpanBasis sb;
            std::string span_id = "-";
            apps::ConstraintRegime regime = make_regime(opt, nullptr);
            if (regime.needs_span()) {
                sb = obtain_span(opt, apps::qrac_scenario(opt.n),
                                 NormalizationMode::PreparedState, run);
                span_id = sb.id();
                regime.span = &sb;
            }
            apps::AppResult res = apps::qrac_bound(opt.n, regime, opt.level, opt.tol);
            run.add(result_row("qrac", opt, opt.n, res, span_id));
        } else if (selftest->parsed()) {
            if (opt.level < 2)
                throw CLI::ValidationError("--level",
                                           "selftest needs level >= 2 (length-3 words)");
            if (std::isnan(opt.pobs)) opt.pobs = apps::qrac_quantum_bound(2);
            SpanBasis sb;
            std::string span_id = "-";
            apps::ConstraintRegime regime = make_regime(opt, nullptr);
            if (regime.needs_span()) {
                sb = obtain_span(opt, apps::qrac_scenario(2),
                                 NormalizationMode::PreparedState, run);
                span_id = sb.id();
                regime.span = &sb;
            }
            apps::AppResult res = apps::selftest_fidelity(opt.pobs, regime, opt.level, opt.tol);
            run.add(result_row("selftest", opt, opt.pobs, res, span_id));
        } else if (cfid->parsed()) {
            Realization ref = apps::qrac_reference_realization();
            double lp = apps::classical_fidelity(ref.states);
            double closed = apps::classical_fidelity_closed_form(ref.states);
            CsvRow row;
            row.application = "classical-fidelity";
            row.regime = "classical";
            row.level = 0;
            row.parameter = 2;
            row.value = lp;
            row.gap = std::abs(lp - closed);
            row.status = "optimal";
            row.seed = opt.seed;
            run.add(row);
            run.manifest.push_back("closed form: " + fmt9(closed));
        } else if (sspan->parsed()) {
            NormalizationMode mode = opt.prepare_mode ? NormalizationMode::PreparedState
                                                      : NormalizationMode::Instrument;
            if (opt.dim < 1) throw CLI::ValidationError("--dim", "sample-span requires --dim");
            if (opt.regime != "dim" && opt.regime != "dim-rank")
                opt.regime = (opt.rank > 0) ? "dim-rank" : "dim";
            SpanBasis sb = obtain_span(opt, span_scenario, mode, run);
            CsvRow row;
            row.application = "sample-span";
            row.regime = regime_label(opt);
            row.level = opt.level;
            row.parameter = sb.samples;
            row.value = sb.rank();
            row.gap = 0.0;
            row.status = sb.saturated ? "ok" : "unsaturated";
            row.span_id = sb.id();
            row.seed = opt.seed;
            run.add(row);
        } else if (verify->parsed()) {
            // CHSH reference: Born probabilities vs K = 2 sqrt(2)
            Realization chsh_ref = apps::chsh_reference_realization();
            chsh_ref.validate();
            CorrelationTable table = born_probabilities(chsh_ref);
            double K = 0.0;
            for (const auto& c : apps::chsh_coefficients())
                K += c.weight * table.at(c.a, c.b, c.x, c.y);
            double k_err = std::abs(K - 2.0 * std::sqrt(2.0));
            CsvRow row;
            row.application = "verify-oracle";
            row.regime = "chsh-reference";
            row.level = 0;
            row.parameter = 2.0 * std::sqrt(2.0);
            row.value = K;
            row.gap = k_err;
            row.status = (k_err < 1e-10) ? "ok" : "mismatch";
            run.add(row);

            Realization qrac_ref = apps::qrac_reference_realization();
            qrac_ref.validate();
            double P = apps::qrac_success_probability(qrac_ref, 2);
            double p_err = std::abs(P - apps::qrac_quantum_bound(2));
            row.regime = "qrac-reference";
            row.parameter = apps::qrac_quantum_bound(2);
            row.value = P;
            row.gap = p_err;
            row.status = (p_err < 1e-10) ? "ok" : "mismatch";
            run.add(row);

            double F = apps::fidelity_direct(qrac_ref);
            row.regime = "fidelity-reference";
            row.parameter = 1.0;
            row.value = F;
            row.gap = std::abs(F - 1.0);
            row.status = (std::abs(F - 1.0) < 1e-10) ? "ok" : "mismatch";
            run.add(row);

            // moment matrices of both references must be PSD
            for (const char* name : {"chsh", "qrac"}) {
                const Realization& r = (name[0] == 'c') ? chsh_ref : qrac_ref;
                MonomialBasis basis =
                    build_basis(scenario_generators(r.scenario.nB, r.scenario.nY), 2);
                double min_eig = 0.0;
                for (const MatrixXcd& blk : numeric_moments(r, basis)) {
                    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(blk, Eigen::EigenvaluesOnly);
                    min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
                }
                row.regime = std::string(name) + "-moments-psd";
                row.parameter = 0.0;
                row.value = min_eig;
                row.gap = std::max(0.0, -min_eig);
                row.status = (min_eig > -1e-9) ? "ok" : "mismatch";
                run.add(row);
            }
        }
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    auto t1 = std::chrono::steady_clock::now();
    double wall = std::chrono::duration<double>(t1 - t0).count();
    run.manifest.insert(run.manifest.begin() + 1,
                        "regime: " + regime_label(opt) + " level " +
                            std::to_string(opt.level) + " seed " +
                            std::to_string(opt.seed) + " tol " + fmt9(opt.tol));
    run.manifest.push_back("wall_time_s: " + fmt9(wall));
    for (const CsvRow& r : run.rows)
        run.manifest.push_back("row " + r.application + " param " + fmt9(r.parameter) +
                               " gap " + fmt9(r.gap) + " status " + r.status);

    if (opt.out_path.empty()) {
        write_csv(run, std::cout);
        for (const std::string& line : run.manifest) std::cerr << "# " << line << "\n";
    } else {
        std::ofstream os(opt.out_path);
        write_csv(run, os);
        std::ofstream ms(opt.out_path + ".manifest");
        for (const std::string& line : run.manifest) ms << line << "\n";
    }
    return run.all_optimal ? 0 : 1;
}
