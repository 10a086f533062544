#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "burgers/axial.hpp"
#include "burgers/checks.hpp"
#include "burgers/experiment.hpp"
#include "burgers/io.hpp"
#include "burgers/scenarios.hpp"
#include "burgers/semigroup.hpp"
#include "burgers/vortex.hpp"

using namespace burgers;
using io::json;
namespace fs = std::filesystem;

namespace {

constexpr int kUsage = 2, kFailed = 1, kSolver = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

fs::path output_root() {
    const char* e = std::getenv("BURGERS_OUTPUT_ROOT");
    return e && *e ? fs::path(e) : fs::path("runs");
}

fs::path run_dir(const std::string& out, const std::string& kind, const json& cfg) {
    if (!out.empty()) return out;
    const std::string s = cfg.dump();
    return output_root() / (kind + "-" + io::hex64(io::fnv1a(s.data(), s.size())).substr(0, 10));
}

// "N:L" or "N"
Grid2D parse_grid(const std::string& source, const std::string& tier_name) {
    if (source.empty()) return Grid2D(12.0, tier(tier_name).N_perp);
    const auto c = source.find(':');
    try {
        const int N = std::stoi(source.substr(0, c));
        const double L = c == std::string::npos ? 12.0 : std::stod(source.substr(c + 1));
        return Grid2D(L, N);
    } catch (const std::exception& e) {
        throw UsageError("--grid: expected N:L, got '" + source + "' (" + e.what() + ")");
    }
}

void emit(const std::string& text, const std::string& out) {
    if (out.empty()) std::cout << text;
    else io::write_atomic(out, text);
}

std::vector<double> parse_list(const std::string& s, const std::string& what) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            v.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw UsageError(what + ": bad number '" + item + "'");
        }
    }
    if (v.empty()) throw UsageError(what + ": empty list");
    return v;
}

// builtin:<name> or a CSV file with columns x3,phi on a uniform cell-centred axis
AxialProfile load_profile(const std::string& source, int n, double L) {
    const std::string pre = "builtin:";
    if (source.rfind(pre, 0) == 0) {
        const std::string name = source.substr(pre.size());
        for (auto& [k, p] : checks::phi_test_profiles(n, L))
            if (k == name) return p;
        if (name == "shift-gaussian")
            return AxialProfile::sample(L, n, [](double x) { return 0.02 * std::exp(-x * x); });
        throw UsageError("--profile: unknown builtin '" + name + "'");
    }
    std::ifstream f(source);
    if (!f) throw io::IoError("cannot open profile " + source);
    std::string line;
    std::vector<double> xs, vs;
    std::getline(f, line);
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        const auto c = line.find(',');
        if (c == std::string::npos) throw io::IoError(source + ": expected x3,phi rows");
        try {
            xs.push_back(std::stod(line.substr(0, c)));
            vs.push_back(std::stod(line.substr(c + 1)));
        } catch (const std::exception&) {
            throw io::IoError(source + ": malformed row '" + line + "'");
        }
    }
    if (xs.size() < 3) throw io::IoError(source + ": need at least 3 rows");
    const double h = xs[1] - xs[0], Lp = -(xs[0] - 0.5 * h);
    for (std::size_t k = 0; k < xs.size(); ++k)
        if (std::abs(xs[k] - (-Lp + (k + 0.5) * h)) > 1e-9 * Lp) throw io::IoError(source + ": axis is not uniform cell-centred");
    if (std::abs(xs.back() - (Lp - 0.5 * h)) > 1e-9 * Lp) throw io::IoError(source + ": axis is not symmetric");
    return AxialProfile(Lp, int(xs.size()), vs);
}

// ---- vortex ------------------------------------------------------------------

struct VortexArgs {
    double lambda = 0.0, rho = 0.0, m = 2.0, tol = 1e-9, h_rho = 0.0;
    std::string grid, tier = "standard", out, lambdas = "0,0.5", rhos = "0.1,0.2,0.4";
    int max_iter = 200;
    bool derivatives = false;
};

int cmd_vortex_solve(const VortexArgs& a, bool as_json) {
    const Grid2D g = parse_grid(a.grid, a.tier);
    const VortexParams p{a.lambda, a.rho, a.m};
    p.validate();
    VortexOptions o;
    o.tol = a.tol;
    o.max_iter = a.max_iter;
    o.derivatives = a.derivatives;
    o.h_rho = a.h_rho;
    const json cfg{{"lambda", a.lambda}, {"rho", a.rho}, {"m", a.m}, {"tol", a.tol}, {"max_iter", a.max_iter},
                   {"grid", {{"L_perp", g.L}, {"N_perp", g.N}}}, {"derivatives", a.derivatives}};
    const fs::path dir = run_dir(a.out, "vortex", cfg);
    io::RunManifest man(dir, "vortex solve", cfg);
    VortexSolution s;
    try {
        s = solve_vortex(p, g, o);
    } catch (const VortexSolveError& e) {
        json err{{"error", e.what()}, {"updates", e.trace()}};
        if (as_json) std::cout << err.dump(2) << "\n";
        else std::cerr << e.what() << " after " << e.trace().size() << " iterations\n";
        return kSolver;
    } catch (const std::domain_error& e) {
        std::cerr << e.what() << "\n";
        return kSolver;
    }
    man.grid("grid", io::grid_hash(g));
    man.save_snapshot("omega_core.bin", io::to_snapshot(s.omega_core));
    man.save_snapshot("Omega_B.bin", io::to_snapshot(s.Omega_B));
    io::Snapshot u = io::to_snapshot(s.U_B.u1);
    u.components = 2;
    u.data.insert(u.data.end(), s.U_B.u2.values().begin(), s.U_B.u2.values().end());
    man.save_snapshot("U_B.bin", u);
    if (a.derivatives) {
        man.save_snapshot("dOmega_drho.bin", io::to_snapshot(s.dOmega_drho));
        man.save_snapshot("d2Omega_drho2.bin", io::to_snapshot(s.d2Omega_drho2));
    }
    const double cn = norm_L2m(s.omega_core, a.m);
    json meta{{"lambda", a.lambda},
              {"rho", a.rho},
              {"m", a.m},
              {"correction_norm", cn},
              {"correction_norm_over_rho2", a.rho != 0.0 ? cn / (a.rho * a.rho) : 0.0},
              {"residual", s.residual},
              {"iterations", s.iterations},
              {"contraction_estimate", s.contraction_estimate},
              {"updates", s.updates},
              {"converged", s.converged},
              {"warning", s.warning}};
    man.save_text("solution.json", io::json_text(meta));
    man.flag("converged", s.converged);
    man.write();
    if (as_json) {
        meta["output_dir"] = dir.string();
        std::cout << meta.dump(2) << "\n";
    } else {
        std::printf("lambda %s  rho %s  m %s  grid %d:%s\n", io::fmt(a.lambda).c_str(), io::fmt(a.rho).c_str(),
                    io::fmt(a.m).c_str(), g.N, io::fmt(g.L).c_str());
        std::printf("iterations            %d\n", s.iterations);
        std::printf("correction_norm       %s\n", io::fmt(cn).c_str());
        std::printf("residual              %s\n", io::fmt(s.residual).c_str());
        std::printf("contraction_estimate  %s\n", io::fmt(s.contraction_estimate).c_str());
        if (!s.warning.empty()) std::printf("warning: %s\n", s.warning.c_str());
        std::printf("output                %s\n", dir.string().c_str());
    }
    return 0;
}

int cmd_vortex_sweep(const VortexArgs& a, bool as_json) {
    const Grid2D g = parse_grid(a.grid, a.tier);
    const auto lams = parse_list(a.lambdas, "--lambdas"), rhos = parse_list(a.rhos, "--rhos");
    for (double l : lams) VortexParams{l, 0.0, a.m}.validate();
    for (double r : rhos) VortexParams{0.0, r, a.m}.validate();
    const json cfg{{"lambdas", lams}, {"rhos", rhos}, {"m", a.m}, {"tol", a.tol}, {"grid", {{"L_perp", g.L}, {"N_perp", g.N}}}};
    const fs::path dir = run_dir(a.out, "sweep", cfg);
    io::RunManifest man(dir, "vortex sweep", cfg);
    io::CsvWriter csv({"lambda", "rho", "correction_norm", "correction_norm_over_rho2", "residual", "iterations"});
    bool all_ok = true;
    for (double l : lams)
        for (double r : rhos) {
            try {
                auto row = checks::vortex_remainder(l, r, g, a.m, a.tol);
                csv.row({l, r, row.correction_norm, row.ratio, row.residual, double(row.iterations)});
            } catch (const VortexSolveError& e) {
                all_ok = false;
                std::cerr << "lambda " << l << " rho " << r << ": " << e.what() << "\n";
                csv.row({l, r, NAN, NAN, NAN, double(e.trace().size())});
            }
        }
    man.grid("grid", io::grid_hash(g));
    man.save_text("sweep.csv", csv.str());
    man.flag("all_converged", all_ok);
    man.write();
    if (as_json) std::cout << json{{"output_dir", dir.string()}, {"all_converged", all_ok}}.dump(2) << "\n";
    else std::cout << csv.str();
    return all_ok ? 0 : kSolver;
}

// ---- stability ---------------------------------------------------------------

struct StabilityArgs {
    std::string config, scenario, tier, out;
    double T = -1.0;
    bool no_wall_clock = false, quiet = false;
};

int cmd_stability(const StabilityArgs& a, bool as_json) {
    StabilityConfig c;
    if (!a.config.empty()) {
        c = parse_stability_config(io::read_all(a.config));
    } else if (!a.scenario.empty()) {
        c = StabilityConfig::builtin(a.scenario, a.tier.empty() ? "standard" : a.tier);
    } else {
        throw UsageError("stability run: give --config or --scenario");
    }
    if (!a.config.empty() && !a.tier.empty()) c.set_tier(a.tier);
    if (a.T >= 0.0) c.T = a.T;
    c.validate();
    const fs::path dir = run_dir(a.out, "stability", c.to_json());
    auto progress = [&](const DiagnosticRow& d) {
        if (!a.quiet && !as_json)
            std::fprintf(stderr, "t %-8s |omega| %-12.6g dev %-12.6g circ %.12f\n", io::fmt(d.t).c_str(), d.omega_norm,
                         d.dev_norm, d.circ_mean);
    };
    StabilitySummary s;
    try {
        s = run_stability(c, dir, progress, !a.no_wall_clock);
    } catch (const EvolutionError& e) {
        std::cerr << e.what() << "\n";
        return kSolver;
    } catch (const VortexSolveError& e) {
        std::cerr << e.what() << "\n";
        return kSolver;
    }
    json j = s.to_json();
    j["output_dir"] = dir.string();
    if (as_json) {
        std::cout << j.dump(2) << "\n";
    } else {
        std::printf("delta_rho_formula      %s\n", io::fmt(s.delta_rho_formula).c_str());
        std::printf("delta_rho_measured     %s\n", io::fmt(s.delta_rho_measured).c_str());
        std::printf("fitted_decay_exponent  %s (%d samples)\n", io::fmt(s.fitted_decay_exponent).c_str(), s.fit_samples);
        for (const auto& [k, v] : s.pass_flags) std::printf("%-22s %s\n", k.c_str(), v ? "PASS" : "FAIL");
        std::printf("output                 %s\n", dir.string().c_str());
    }
    return s.passed() ? 0 : kFailed;
}

// ---- phi ---------------------------------------------------------------------

struct PhiArgs {
    std::string profile = "builtin:gaussian", out;
    double t = 1.0, L = 8.0, dt = 0.0;
    int n = 1024;
};

int cmd_phi_evolve(const PhiArgs& a, bool as_json) {
    if (!(a.t >= 0.0)) throw UsageError("--t: must be non-negative");
    AxialProfile p = load_profile(a.profile, a.n, a.L);
    AxialProfile e = phi_evolve_exact(p, a.t), f = phi_evolve_fd(p, a.t, a.dt);
    io::CsvWriter csv({"x3", "phi_exact", "phi_fd", "abs_diff"});
    double md = 0.0;
    for (int k = 0; k < p.N3; ++k) {
        const double d = std::abs(e.values[k] - f.values[k]);
        md = std::max(md, d);
        csv.row({p.x(k), e.values[k], f.values[k], d});
    }
    if (as_json) {
        SupEstimates se = sup_estimates(p, e, a.t), sf = sup_estimates(p, f, a.t);
        json j{{"t", a.t}, {"points", p.N3}, {"sup_diff", md}, {"bounds_exact", se.all()}, {"bounds_fd", sf.all()}};
        if (!a.out.empty()) io::write_atomic(a.out, csv.str());
        std::cout << j.dump(2) << "\n";
    } else {
        emit(csv.str(), a.out);
    }
    return 0;
}

int cmd_phi_shift(const PhiArgs& a, bool as_json) {
    AxialProfile p = load_profile(a.profile, a.n, a.L);
    ShiftResult r = shift_delta_rho_report(p);
    if (as_json) std::cout << json{{"delta_rho", r.delta_rho}, {"warning", r.warning}}.dump(2) << "\n";
    else {
        std::printf("%s\n", io::fmt(r.delta_rho).c_str());
        if (!r.warning.empty()) std::fprintf(stderr, "warning: %s\n", r.warning.c_str());
    }
    return 0;
}

// ---- checks ------------------------------------------------------------------

int cmd_semigroup_check(double alpha, const std::string& ns, const std::string& out, bool as_json) {
    if (!(alpha > 0.0)) throw UsageError("--alpha: must be positive");
    io::CsvWriter csv({"n", "alpha", "fitted_rate", "expected_rate", "rel_error"});
    json rows = json::array();
    for (double nd : parse_list(ns, "--n")) {
        const int n = int(nd);
        if (n < 0 || n != nd) throw UsageError("--n: non-negative integers");
        SpectrumResult s = spectrum_check(alpha, n);
        csv.row({double(s.n), s.alpha, s.fitted_rate, s.expected_rate, s.rel_error});
        rows.push_back({{"n", s.n}, {"alpha", s.alpha}, {"fitted_rate", s.fitted_rate},
                        {"expected_rate", s.expected_rate}, {"rel_error", s.rel_error}});
    }
    if (as_json) std::cout << rows.dump(2) << "\n";
    else emit(csv.str(), out);
    if (as_json && !out.empty()) io::write_atomic(out, csv.str());
    return 0;
}

int cmd_bs_check(const std::string& grid, const std::string& tier_name, const std::string& out, bool as_json) {
    const Grid2D g = parse_grid(grid, tier_name);
    auto rows = checks::g0_profile_rows(g);
    io::CsvWriter csv({"r", "numeric", "analytic", "rel_error"});
    for (const auto& r : rows) csv.row({r.r, r.numeric, r.analytic, r.rel_error});
    if (as_json) {
        if (!out.empty()) io::write_atomic(out, csv.str());
        std::cout << json{{"points", rows.size()}, {"max_rel_error", checks::max_rel_error(rows)}}.dump(2) << "\n";
    } else {
        emit(csv.str(), out);
    }
    return 0;
}

int cmd_verify(const std::string& only, const std::string& field, const std::string& tier_name, bool as_json) {
    if (!field.empty()) {
        io::Snapshot s = io::read_snapshot(field);  // throws on any corruption before checks run
        if (!as_json)
            std::printf("loaded %s: %d components on %d x %d x %d\n", field.c_str(), s.components, s.N_perp, s.N_perp, s.N_3);
    }
    const Tier t = tier(tier_name);
    auto battery = checks::battery(t.N_perp, t.N_3);
    std::set<std::string> sel;
    if (!only.empty()) {
        std::stringstream ss(only);
        std::string item;
        while (std::getline(ss, item, ',')) {
            bool known = false;
            for (const auto& c : battery) known = known || c.name == item;
            if (!known) throw UsageError("--only: unknown check '" + item + "'");
            sel.insert(item);
        }
    }
    auto res = checks::run_battery(battery, sel);
    bool ok = true;
    json j = json::array();
    for (const auto& r : res) {
        ok = ok && r.pass;
        j.push_back({{"name", r.name}, {"pass", r.pass}, {"detail", r.detail}, {"seconds", r.seconds}});
        if (!as_json) std::printf("%-18s %s  %s\n", r.name.c_str(), r.pass ? "PASS" : "FAIL", r.detail.c_str());
    }
    if (as_json) std::cout << j.dump(2) << "\n";
    if (!ok) {
        std::fprintf(stderr, "failed:");
        for (const auto& r : res)
            if (!r.pass) std::fprintf(stderr, " %s", r.name.c_str());
        std::fprintf(stderr, "\n");
    }
    return ok ? 0 : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Burgers vortex experiments"};
    app.require_subcommand(1);
    bool as_json = false;
    app.add_flag("--json", as_json, "machine-readable output");

    auto* vortex = app.add_subcommand("vortex", "steady vortex solver");
    vortex->require_subcommand(1);
    VortexArgs va;
    auto* vsolve = vortex->add_subcommand("solve", "solve for one (lambda, rho)");
    vsolve->add_option("--lambda", va.lambda, "strain asymmetry in [0,1)")->required();
    vsolve->add_option("--rho", va.rho, "circulation")->required();
    vsolve->add_option("--m", va.m, "weight exponent")->capture_default_str();
    vsolve->add_option("--tol", va.tol, "relative update tolerance")->capture_default_str();
    vsolve->add_option("--max-iter", va.max_iter)->capture_default_str();
    vsolve->add_option("--grid", va.grid, "N:L transverse grid");
    vsolve->add_option("--tier", va.tier)->check(CLI::IsMember({"coarse", "standard", "fine"}))->capture_default_str();
    vsolve->add_flag("--derivatives", va.derivatives, "also write rho-derivatives");
    vsolve->add_option("--h-rho", va.h_rho, "rho step for derivatives");
    vsolve->add_option("--out", va.out, "output directory");
    auto* vsweep = vortex->add_subcommand("sweep", "grid of (lambda, rho)");
    vsweep->add_option("--lambdas", va.lambdas)->capture_default_str();
    vsweep->add_option("--rhos", va.rhos)->capture_default_str();
    vsweep->add_option("--m", va.m)->capture_default_str();
    vsweep->add_option("--tol", va.tol)->capture_default_str();
    vsweep->add_option("--grid", va.grid, "N:L transverse grid");
    vsweep->add_option("--tier", va.tier)->check(CLI::IsMember({"coarse", "standard", "fine"}))->capture_default_str();
    vsweep->add_option("--out", va.out, "output directory");

    auto* stab = app.add_subcommand("stability", "perturbation dynamics");
    stab->require_subcommand(1);
    StabilityArgs sa;
    auto* srun = stab->add_subcommand("run", "evolve a configured experiment");
    srun->add_option("--config", sa.config, "key = value or JSON config file")->check(CLI::ExistingFile);
    srun->add_option("--scenario", sa.scenario, "builtin scenario")
        ->check(CLI::IsMember({"sym-shift", "decay", "equilibrium", "random"}));
    srun->add_option("--tier", sa.tier)->check(CLI::IsMember({"coarse", "standard", "fine"}));
    srun->add_option("--T", sa.T, "final time (overrides config)");
    srun->add_option("--out", sa.out, "output directory");
    srun->add_flag("--no-wall-clock", sa.no_wall_clock, "omit wall-clock from the manifest");
    srun->add_flag("--quiet", sa.quiet);

    auto* phi = app.add_subcommand("phi", "axial mode");
    phi->require_subcommand(1);
    PhiArgs pa;
    auto* pev = phi->add_subcommand("evolve", "closed form vs finite differences");
    auto* psh = phi->add_subcommand("shift", "circulation shift of a profile");
    for (auto* s : {pev, psh}) {
        s->add_option("--profile", pa.profile, "builtin:<name> or CSV file (x3,phi)")->capture_default_str();
        s->add_option("--n", pa.n, "points for builtin profiles")->capture_default_str();
        s->add_option("--L", pa.L, "half-width for builtin profiles")->capture_default_str();
    }
    pev->add_option("--t", pa.t)->capture_default_str();
    pev->add_option("--dt", pa.dt, "FD step (0: automatic)");
    pev->add_option("--out", pa.out, "CSV file (default stdout)");

    auto* sg = app.add_subcommand("semigroup", "Fokker-Planck semigroup");
    sg->require_subcommand(1);
    double alpha = 1.0;
    std::string ns = "0,1,2", sg_out;
    auto* sgc = sg->add_subcommand("check", "fitted decay rates of eigenfunctions");
    sgc->add_option("--alpha", alpha)->capture_default_str();
    sgc->add_option("--n", ns)->capture_default_str();
    sgc->add_option("--out", sg_out, "CSV file (default stdout)");

    auto* bs = app.add_subcommand("biot-savart", "velocity law");
    bs->require_subcommand(1);
    std::string bs_grid, bs_tier = "standard", bs_out;
    auto* bsc = bs->add_subcommand("check", "G0 azimuthal profile");
    bsc->add_option("--grid", bs_grid, "N:L transverse grid");
    bsc->add_option("--tier", bs_tier)->check(CLI::IsMember({"coarse", "standard", "fine"}))->capture_default_str();
    bsc->add_option("--out", bs_out, "CSV file (default stdout)");

    auto* ver = app.add_subcommand("verify", "invariant battery");
    std::string only, field, ver_tier = "standard";
    ver->add_option("--only", only, "comma-separated subset");
    ver->add_option("--field", field, "snapshot file to validate first");
    ver->add_option("--tier", ver_tier)->check(CLI::IsMember({"coarse", "standard", "fine"}))->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*vsolve) return cmd_vortex_solve(va, as_json);
        if (*vsweep) return cmd_vortex_sweep(va, as_json);
        if (*srun) return cmd_stability(sa, as_json);
        if (*pev) return cmd_phi_evolve(pa, as_json);
        if (*psh) return cmd_phi_shift(pa, as_json);
        if (*sgc) return cmd_semigroup_check(alpha, ns, sg_out, as_json);
        if (*bsc) return cmd_bs_check(bs_grid, bs_tier, bs_out, as_json);
        if (*ver) return cmd_verify(only, field, ver_tier, as_json);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kUsage;
    } catch (const io::IoError& e) {
        std::cerr << "load error: " << e.what() << "\n";
        return kFailed;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid argument: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailed;
    }
    return kUsage;
}
