#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "arcvol/config.hpp"
#include "arcvol/slow_factor.hpp"

namespace arcvol {

namespace {

constexpr int kPrecision = 10;

class Table {
public:
    void row(std::string name, double value) { rows_.emplace_back(std::move(name), value); }

    void print(std::ostream& out) const {
        std::size_t width = 8;
        for (const auto& [n, _] : rows_) width = std::max(width, n.size());
        out << std::left << std::setw(static_cast<int>(width + 2)) << "quantity" << "value\n";
        for (const auto& [n, v] : rows_)
            out << std::left << std::setw(static_cast<int>(width + 2)) << n << std::setprecision(kPrecision) << v << '\n';
    }

    void print_delimited(std::ostream& out) const {
        out << "quantity,value\n";
        for (const auto& [n, v] : rows_) out << n << ',' << std::setprecision(kPrecision) << v << '\n';
    }

private:
    std::vector<std::pair<std::string, double>> rows_;
};

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream f(path);
    if (!f) throw Error(ErrorCode::ConfigError, "cannot write " + path.string());
    return f;
}

}  // namespace

int cmd_price(const RunConfig& cfg, std::ostream& out, const CommandIo& io) {
    const auto model = build_model(cfg.model);
    const auto f = cfg.vol_function();
    const auto pb = price_first_order(cfg.option, model, f, cfg.pricer);

    Table t;
    t.row("q0", pb.q0);
    t.row("mod_factor", pb.mod_factor);
    t.row("p0", pb.p0);
    t.row("time_factor", pb.time_factor);
    t.row("sigma_bar", pb.sigma_bar);
    t.row("v", pb.v);
    t.row("d1d2_q0", pb.d1d2);
    t.row("correction", pb.correction);
    t.row("total", pb.total);
    t.print(out);
    if (io.out_path) {
        auto file = open_out(*io.out_path);
        t.print_delimited(file);
    }
    return 0;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out, const CommandIo& io) {
    const auto model = build_model(cfg.model);
    const auto f = cfg.vol_function();
    const double asymptotic = price_first_order(cfg.option, model, f, cfg.pricer).total;
    const auto est = mc_price(model, cfg.option, f, cfg.sim);
    const double err = std::abs(asymptotic - est.price);

    Table t;
    t.row("mc_price", est.price);
    t.row("std_error", est.std_error);
    t.row("n_effective", static_cast<double>(est.n_effective));
    t.row("asymptotic", asymptotic);
    t.row("abs_error", err);
    t.print(out);
    out << "within_3se " << (err <= 3.0 * est.std_error ? "yes" : "no") << '\n';

    std::ostringstream delimited;
    t.print_delimited(delimited);

    if (!cfg.sweep_epsilons.empty()) {
        const auto sweep = epsilon_sweep(model, cfg.option, f, cfg.sim, cfg.sweep_epsilons, cfg.pricer);
        out << "\nepsilon,steps_per_year,asymptotic,mc_price,std_error,abs_error\n";
        delimited << "\nepsilon,steps_per_year,asymptotic,mc_price,std_error,abs_error\n";
        for (const auto& row : sweep.rows) {
            std::ostringstream line;
            line << std::setprecision(kPrecision) << row.epsilon << ',' << row.steps_per_year << ',' << row.asymptotic
                 << ',' << row.mc.price << ',' << row.mc.std_error << ',' << row.abs_error << '\n';
            out << line.str();
            delimited << line.str();
        }
        out << "sweep_verdict " << (sweep.non_increasing ? "non-increasing" : "increasing") << '\n';
    }

    if (io.out_path) {
        auto file = open_out(*io.out_path);
        file << delimited.str();
    }
    if (io.paths_dump) {
        SimConfig dump = cfg.sim;
        dump.record_paths = true;
        const auto sim = simulate_terminal(model, cfg.option, f, dump);
        auto file = open_out(*io.paths_dump);
        write_path_dump(file, sim);
    }
    return 0;
}

int cmd_calibrate(const RunConfig& cfg, std::ostream& out, std::ostream& err, const CommandIo& io) {
    if (cfg.chain.empty()) throw Error(ErrorCode::ConfigError, "calibrate needs a chain file");
    const auto chain = load_chain(cfg.chain);
    for (const auto& rej : chain.rejected)
        err << cfg.chain.string() << ':' << rej.line << ": rejected: " << rej.reason << '\n';

    const auto res = calibrate_effective(chain.quotes, cfg.calib);
    std::ostringstream report;
    write_calib_report(report, res);
    report << "rejected_rows=" << chain.rejected.size() << '\n';
    out << report.str();

    // Per-strike a at the fitted (k, sigma_bar), as a diagnostic.
    try {
        const auto a_fit = estimate_a(chain.quotes, res.k_hat, chain.quotes.front().rate, res.sigma_bar_hat);
        out << std::setprecision(kPrecision) << "a_only_fit=" << a_fit.a_hat << '\n';
        out << "strike,a_hat,quotes\n";
        for (const auto& s : a_fit.per_strike)
            out << std::setprecision(kPrecision) << s.strike << ',' << s.a_hat << ',' << s.quotes << '\n';
    } catch (const Error& e) {
        out << "a_only_fit=unavailable (" << e.what() << ")\n";
    }

    if (io.out_path) {
        auto file = open_out(*io.out_path);
        file << report.str();
    }
    return 0;
}

int cmd_diagnose(const RunConfig& cfg, std::ostream& out, const CommandIo& io) {
    std::ostringstream rep;
    rep << std::setprecision(kPrecision);
    const auto model = build_model(cfg.model);
    const auto f = cfg.vol_function();
    const auto& spec = cfg.option;
    validate_option(spec);

    auto guarded = [&](const char* what, auto&& body) {
        try {
            body();
        } catch (const Error& e) {
            rep << "[WARN] " << what << ": " << e.what() << '\n';
        }
    };

    guarded("truncation", [&] {
        const auto tr = truncation_report(model, spec.maturity);
        rep << (tr.bound_applies ? (tr.within_bound ? "[PASS] " : "[FAIL] ") : "[INFO] ") << "truncation t=" << spec.maturity
            << " exact_mean=" << tr.exact_mean << " parabolic=" << tr.parabolic << " abs_error=" << tr.abs_error
            << " bound=" << tr.bound << '\n';
    });

    guarded("l2_time_coefficient", [&] {
        const auto chk = l2_time_coefficient_check(model, spec.t);
        const double gap = chk.relative_gap();
        rep << (gap <= 1e-10 ? "[PASS] " : "[FAIL] ") << "l2_time_coefficient t=" << spec.t << " direct=" << chk.direct
            << " gamma_form=" << chk.gamma_form << " rel_gap=" << gap << '\n';
    });

    guarded("effective parameters", [&] {
        const auto eff = effective_at_valuation(spec, model, f, cfg.pricer);
        const auto sb = sigma_bar_detail(f, eff.z, model.m(), model.nu(), cfg.pricer.sigma_bar_definition);
        rep << (sb.last_change <= 1e-10 ? "[PASS] " : "[FAIL] ") << "quadrature sigma_bar=" << sb.value
            << " nodes=" << sb.nodes << " last_change=" << sb.last_change << '\n';

        guarded("phi residual", [&] {
            const auto phi = solve_phi_derivative(f, eff.z, model.m(), model.nu());
            const double res = phi_residual(phi, f, eff.z);
            rep << (res <= 1e-6 ? "[PASS] " : "[FAIL] ") << "phi_residual=" << res << " cells=" << phi.cells
                << " centering=" << phi.centering << '\n';
        });

        guarded("p0 PDE residual", [&] {
            if (!(spec.maturity > 0.0)) throw Error(ErrorCode::DomainError, "needs T > 0");
            OptionSpec interior = spec;
            if (!(spec.t > 0.0 && spec.t < spec.maturity)) interior.t = 0.5 * spec.maturity;
            const double classical = p0_pde_residual(interior, model, eff, {true, true});
            const double modified = p0_pde_residual(interior, model, eff, {});
            rep << (classical <= 1e-4 ? "[PASS] " : "[FAIL] ") << "p0_pde_residual classical_reduction t=" << interior.t
                << " residual=" << classical << '\n';
            rep << "[INFO] p0_pde_residual modified_operator t=" << interior.t << " residual=" << modified << '\n';
        });
    });

    out << rep.str();
    if (io.out_path) {
        auto file = open_out(*io.out_path);
        file << rep.str();
    }
    return 0;
}

}  // namespace arcvol
