// Command-line front end: run the modified flow on the 2- or 4-torus, run the
// invariant suites, verify the principal symbols, or describe the on-disk
// formats.  Exit codes: 0 success, 1 validation failure, 2 runtime abort,
// 3 check failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <torusflow/check.hpp>
#include <torusflow/flow.hpp>
#include <torusflow/io.hpp>
#include <torusflow/moment.hpp>
#include <torusflow/symbol.hpp>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitCheck = 3;

struct FlowCliArgs {
    std::string config_path;
    std::string out_dir;  // overrides the config's output directory when set
    std::vector<std::string> overrides;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Loads and validates the config for a flow subcommand.  The subcommand fixes
// the dimension: it fills `dim` when the file omits it and rejects an explicit
// conflict instead of silently rewriting the file's value.
torusflow::RunConfig load_flow_config(const FlowCliArgs& args, int want_dim) {
    nlohmann::json j = nlohmann::json::parse(read_file(args.config_path));
    if (!j.is_object()) throw std::runtime_error("config root must be a JSON object");
    if (!j.contains("dim")) j["dim"] = want_dim;

    std::vector<std::string> overrides = args.overrides;
    if (!args.out_dir.empty()) overrides.push_back("out=" + args.out_dir);

    torusflow::RunConfig cfg = torusflow::parse_config_text(j.dump(), overrides);
    if (cfg.dim != want_dim)
        throw std::runtime_error("config key 'dim': flow" + std::to_string(want_dim) +
                                 " requires dim=" + std::to_string(want_dim) + ", got " +
                                 std::to_string(cfg.dim));
    return cfg;
}

std::filesystem::path snapshot_base(const torusflow::RunConfig& cfg, const char* tag) {
    return std::filesystem::path(cfg.out_dir) / (std::string("map_") + tag);
}

std::filesystem::path snapshot_base(const torusflow::RunConfig& cfg, long step) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "map_%06ld", step);
    return std::filesystem::path(cfg.out_dir) / buf;
}

// One full integration with gauge bookkeeping, used twice for the refinement
// study.  Returns the max DeTurck residual over the interior samples and the
// worst gauge-map density deviation from 1.
struct GaugeStudy {
    double max_residual = 0.0;
    double max_density_error = 0.0;
};

GaugeStudy gauge_study(const torusflow::FlowResult& result, const torusflow::FlowOptions& opt,
                       std::vector<double>* residuals_out = nullptr) {
    std::vector<double> times;
    times.reserve(result.history.size());
    for (const auto& rec : result.history) times.push_back(rec.t);

    std::vector<torusflow::TorusMap> gauge =
        torusflow::gauge_reconstruct(result.w_samples, times, opt.interp);
    std::vector<double> res = torusflow::deturck_residuals(result.trajectory, gauge, times,
                                                           opt.inverse_tol, opt.interp);
    GaugeStudy out;
    for (double r : res) out.max_residual = std::max(out.max_residual, r);
    for (const auto& phi : gauge) {
        torusflow::ScalarField h = torusflow::map_density(phi);
        for (std::size_t i = 0; i < h.size(); i++)
            out.max_density_error = std::max(out.max_density_error, std::abs(h[i] - 1.0));
    }
    if (residuals_out) *residuals_out = std::move(res);
    return out;
}

int cmd_flow(const FlowCliArgs& args, int want_dim) {
    torusflow::RunConfig cfg = load_flow_config(args, want_dim);
    std::filesystem::create_directories(cfg.out_dir);

    torusflow::TorusMap f0 = torusflow::initial_map_from_config(cfg);
    torusflow::FlowOptions opt = torusflow::flow_options_from_config(cfg);

    long accepted = 0;
    torusflow::StepCallback on_accept;
    if (cfg.snapshot_stride > 0) {
        torusflow::write_map_snapshot(snapshot_base(cfg, "initial").string(), f0);
        on_accept = [&](const torusflow::StepRecord& rec, const torusflow::TorusMap& f) {
            if (rec.dt == 0.0) return;  // the t = 0 record is map_initial
            accepted++;
            if (accepted % cfg.snapshot_stride == 0)
                torusflow::write_map_snapshot(snapshot_base(cfg, accepted).string(), f);
        };
    }

    torusflow::FlowResult result = torusflow::run_flow(f0, opt, on_accept);
    if (cfg.snapshot_stride > 0)
        torusflow::write_map_snapshot(snapshot_base(cfg, "final").string(), result.f);

    // Gauge verification: reconstruct the reparametrizing family, fill the
    // residual column, and repeat at half the step to measure the decay order.
    double residual_order = std::nan("");
    GaugeStudy study;
    if (cfg.gauge_check && !result.aborted && result.history.size() >= 3) {
        std::vector<double> res;
        study = gauge_study(result, opt, &res);
        for (std::size_t i = 0; i < res.size() && i < result.history.size(); i++)
            result.history[i].residual = res[i];

        torusflow::FlowOptions half = opt;
        half.dt = result.history.back().dt * 0.5;
        if (opt.dt > 0.0) half.dt = opt.dt * 0.5;
        torusflow::FlowResult fine = torusflow::run_flow(f0, half);
        if (!fine.aborted && fine.history.size() >= 3) {
            GaugeStudy fine_study = gauge_study(fine, half);
            if (fine_study.max_residual > 0.0 && study.max_residual > 0.0)
                residual_order = std::log2(study.max_residual / fine_study.max_residual);
        }
    }

    std::filesystem::path csv_path = std::filesystem::path(cfg.out_dir) / cfg.csv;
    torusflow::write_csv(csv_path.string(), result.history);

    nlohmann::json summary;
    summary["phi0"] = result.history.front().phi;
    summary["phiT"] = result.history.back().phi;
    summary["steps"] = result.history.size() - 1;
    summary["aborted"] = result.aborted;
    summary["residual_order"] =
        std::isnan(residual_order) ? nlohmann::json() : nlohmann::json(residual_order);
    summary["rejected_steps"] = result.rejected_steps;
    summary["converged"] = result.converged;
    summary["t_final"] = result.history.back().t;
    if (result.aborted) summary["abort_reason"] = result.abort_reason;
    if (cfg.gauge_check) {
        summary["max_residual"] = study.max_residual;
        summary["max_gauge_density_error"] = study.max_density_error;
    }
    torusflow::write_text_file((std::filesystem::path(cfg.out_dir) / "summary.json").string(),
                               summary.dump(2) + "\n");

    std::printf("wrote %s (%zu accepted steps)\n", csv_path.string().c_str(),
                result.history.size() - 1);
    std::printf("phi: %.6e -> %.6e%s\n", result.history.front().phi,
                result.history.back().phi, result.converged ? "  (stop ratio reached)" : "");
    if (cfg.gauge_check && !std::isnan(residual_order))
        std::printf("gauge residual %.3e, density error %.3e, decay order %.2f\n",
                    study.max_residual, study.max_density_error, residual_order);
    if (result.aborted) {
        std::fprintf(stderr, "integrator abort: %s\n", result.abort_reason.c_str());
        return kExitRuntime;
    }
    return kExitOk;
}

int cmd_check(const std::string& level) {
    torusflow::CheckLevel lvl =
        level == "full" ? torusflow::CheckLevel::Full : torusflow::CheckLevel::Fast;
    std::vector<torusflow::CheckResult> results = torusflow::run_checks(lvl);
    std::fputs(torusflow::format_report(results).c_str(), stdout);
    return torusflow::all_passed(results) ? kExitOk : kExitCheck;
}

// Samples the two closed-form determinant identities and the spectral floor
// over random symbols, plus a grid probe that reads the symbol off the
// discrete operator itself.
int cmd_symbol() {
    torusflow::Rng rng(2026);
    const int draws = 10000;
    double det_err2 = 0.0, det_err4 = 0.0;
    double min_eig2 = 1e300, min_eig4 = 1e300;
    for (int i = 0; i < draws; i++) {
        double coeff = 0.1 + 9.9 * rng.uniform();
        std::array<double, 2> xi2{};
        std::array<double, 4> xi4{};
        double norm2 = 0.0, norm4 = 0.0;
        for (int a = 0; a < 2; a++) {
            xi2[static_cast<std::size_t>(a)] = 6.0 * rng.uniform() - 3.0;
            norm2 += xi2[static_cast<std::size_t>(a)] * xi2[static_cast<std::size_t>(a)];
        }
        for (int a = 0; a < 4; a++) {
            xi4[static_cast<std::size_t>(a)] = 6.0 * rng.uniform() - 3.0;
            norm4 += xi4[static_cast<std::size_t>(a)] * xi4[static_cast<std::size_t>(a)];
        }
        if (norm2 < 1e-4 || norm4 < 1e-4) continue;

        torusflow::SymbolMatrix s2 = torusflow::symbol_t2(coeff, xi2);
        torusflow::SymbolMatrix s4 = torusflow::symbol_t4(coeff, xi4);
        double want2 = coeff * norm2 * norm2;
        double want4 = std::pow(0.5 * coeff, 3) * std::pow(norm4, 4);
        det_err2 = std::max(det_err2, std::abs(torusflow::symbol_det(s2) - want2) / want2);
        det_err4 = std::max(det_err4, std::abs(torusflow::symbol_det(s4) - want4) / want4);
        min_eig2 = std::min(min_eig2, torusflow::symbol_min_eigenvalue(s2));
        min_eig4 = std::min(min_eig4, torusflow::symbol_min_eigenvalue(s4));
    }

    torusflow::TorusGrid g2 = torusflow::make_grid(2, 16);
    std::array<int, 4> k{2, -5, 0, 0};
    double coeff = 4.0;
    torusflow::SymbolMatrix probed = torusflow::symbol_probe(
        [&](const torusflow::KForm& a) { return torusflow::elliptic_operator_t2(coeff, a); },
        g2, k, coeff);
    torusflow::SymbolMatrix closed = torusflow::symbol_t2(
        coeff, {2.0 * std::acos(-1.0) * k[0], 2.0 * std::acos(-1.0) * k[1]});
    double probe_err = 0.0, probe_scale = 0.0;
    for (int i = 0; i < 2; i++)
        for (int j = 0; j < 2; j++) {
            probe_err = std::max(probe_err, std::abs(probed.at(i, j) - closed.at(i, j)));
            probe_scale = std::max(probe_scale, std::abs(closed.at(i, j)));
        }
    probe_err /= probe_scale;

    std::printf("principal symbol verification (%d random draws)\n", draws);
    std::printf("  dim 2: det vs coeff*|xi|^4        max rel err %.3e\n", det_err2);
    std::printf("  dim 2: min eigenvalue             %.6e\n", min_eig2);
    std::printf("  dim 4: det vs (coeff/2)^3*|xi|^8  max rel err %.3e\n", det_err4);
    std::printf("  dim 4: min eigenvalue             %.6e\n", min_eig4);
    std::printf("  grid probe vs closed form (n=16, k=(2,-5)): rel err %.3e\n", probe_err);

    bool ok = det_err2 <= 1e-12 && det_err4 <= 1e-12 && min_eig2 > 0.0 && min_eig4 > 0.0 &&
              probe_err <= 1e-12;
    std::printf("%s\n", ok ? "all symbol identities verified" : "SYMBOL VERIFICATION FAILED");
    return ok ? kExitOk : kExitCheck;
}

int cmd_describe() {
    std::fputs(
        "torusflow: gradient flow of the symplectic-deviation energy on flat tori\n"
        "\n"
        "subcommands\n"
        "  flow2     integrate the modified flow on the 2-torus (--config required)\n"
        "  flow4     integrate the modified flow on the 4-torus (--config required)\n"
        "  check     run the invariant suites (--level fast|full), exit 3 on failure\n"
        "  symbol    verify the principal-symbol determinant and ellipticity bounds\n"
        "  describe  print this overview\n"
        "\n"
        "config file: flat JSON object; command-line --set key=value wins over the file\n"
        "  dim              2 | 4 (fixed by the flow subcommand if absent)\n"
        "  n                grid points per axis, power of two >= 8 (default 32)\n"
        "  t_end            integration time (default 1.0)\n"
        "  dt               step size, or \"auto\" = 0.2 h^2 / max H^2 (default auto)\n"
        "  integrator       rk4 | imex (default rk4)\n"
        "  perturbation     random | hamiltonian | shear | none (default random)\n"
        "  amplitude        displacement amplitude of the initial map (default 0.05)\n"
        "  seed             generator seed, reproducible across platforms (default 1)\n"
        "  modes_max        band limit of generated data; 0 = n/8 (default 0)\n"
        "  inverse_tol      Newton tolerance for map inversion (default 1e-10)\n"
        "  interp           auto | spectral | refined interpolation mode\n"
        "  phi_stop_ratio   stop once phi <= ratio * phi(0); 0 disables (default 0)\n"
        "  snapshot_stride  write a map snapshot every k accepted steps (default 0)\n"
        "  gauge_check      reconstruct the gauge family and measure the\n"
        "                   equivalence residual at dt and dt/2 (default false)\n"
        "  out              output directory (default \".\")\n"
        "  csv              diagnostics file name (default \"flow.csv\")\n"
        "\n"
        "outputs\n"
        "  <out>/<csv>          one row per accepted step:\n"
        "                       t,phi,mu_inf,minH,gradnorm,dt,residual (17 digits)\n"
        "  <out>/summary.json   phi0, phiT, steps, aborted, residual_order\n"
        "  <out>/map_*.f64      snapshot payload: displacement components,\n"
        "                       little-endian float64, row-major axis order\n"
        "  <out>/map_*.json     snapshot sidecar: dim, n_per_axis, components\n"
        "\n"
        "exit codes: 0 success, 1 validation error, 2 runtime abort, 3 check failure\n",
        stdout);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"moment-map gradient flow on flat tori"};
    app.require_subcommand(1);

    FlowCliArgs flow_args;
    std::string level = "fast";

    CLI::App* flow2 = app.add_subcommand("flow2", "integrate the flow on the 2-torus");
    CLI::App* flow4 = app.add_subcommand("flow4", "integrate the flow on the 4-torus");
    for (CLI::App* sub : {flow2, flow4}) {
        sub->add_option("--config", flow_args.config_path, "JSON run configuration")
            ->required();
        sub->add_option("--out", flow_args.out_dir, "output directory (overrides config)");
        sub->add_option("--set", flow_args.overrides,
                        "override a config key, e.g. --set dt=1e-4 (repeatable)");
    }

    CLI::App* check = app.add_subcommand("check", "run the invariant suites");
    check->add_option("--level", level, "fast (default) or full")
        ->check(CLI::IsMember({"fast", "full"}));

    CLI::App* symbol = app.add_subcommand("symbol", "verify the principal symbols");
    CLI::App* describe = app.add_subcommand("describe", "print formats and config keys");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (flow2->parsed()) return cmd_flow(flow_args, 2);
        if (flow4->parsed()) return cmd_flow(flow_args, 4);
        if (check->parsed()) return cmd_check(level);
        if (symbol->parsed()) return cmd_symbol();
        if (describe->parsed()) return cmd_describe();
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitValidation;
    } catch (const nlohmann::json::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitValidation;
    } catch (const std::runtime_error& e) {
        // Validation problems (bad config values, unreadable files) exit 1;
        // anything raised mid-computation is a runtime abort.
        std::string msg = e.what();
        bool validation = msg.find("config") != std::string::npos ||
                          msg.find("key") != std::string::npos ||
                          msg.find("unsupported") != std::string::npos;
        std::fprintf(stderr, "error: %s\n", msg.c_str());
        return validation ? kExitValidation : kExitRuntime;
    }
    return kExitValidation;
}
