#include "torusflow/io.hpp"

#include <json.hpp>

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <stdexcept>

namespace torusflow {

using nlohmann::json;

namespace {

[[noreturn]] void fail_key(const std::string& key, const std::string& what) {
    throw std::runtime_error("config key '" + key + "': " + what);
}

double require_number(const json& j, const std::string& key) {
    if (!j.is_number()) fail_key(key, "expected a number");
    return j.get<double>();
}

long require_integer(const json& j, const std::string& key) {
    if (!j.is_number_integer()) fail_key(key, "expected an integer");
    return j.get<long>();
}

std::string require_string(const json& j, const std::string& key) {
    if (!j.is_string()) fail_key(key, "expected a string");
    return j.get<std::string>();
}

RunConfig config_from_json(const json& j) {
    if (!j.is_object()) throw std::runtime_error("config: top level must be a JSON object");
    static const std::set<std::string> known = {
        "dim",         "n",          "t_end",          "dt",
        "integrator",  "perturbation", "amplitude",    "seed",
        "modes_max",   "inverse_tol", "interp",        "phi_stop_ratio",
        "snapshot_stride", "gauge_check", "out",       "csv"};
    for (const auto& item : j.items())
        if (known.find(item.key()) == known.end()) fail_key(item.key(), "unknown key");

    RunConfig cfg;
    if (j.contains("dim")) {
        long d = require_integer(j["dim"], "dim");
        if (d != 2 && d != 4) fail_key("dim", "unsupported dimension " + std::to_string(d));
        cfg.dim = static_cast<int>(d);
    }
    if (j.contains("n")) {
        long n = require_integer(j["n"], "n");
        if (n < 8 || (n & (n - 1)) != 0)
            fail_key("n", "grid size must be a power of two >= 8");
        cfg.n = static_cast<int>(n);
    }
    if (j.contains("t_end")) {
        cfg.t_end = require_number(j["t_end"], "t_end");
        if (!(cfg.t_end > 0.0)) fail_key("t_end", "must be positive");
    }
    if (j.contains("dt")) {
        const json& v = j["dt"];
        if (v.is_string()) {
            if (v.get<std::string>() != "auto")
                fail_key("dt", "expected a positive number or \"auto\"");
            cfg.dt = 0.0;
        } else {
            cfg.dt = require_number(v, "dt");
            if (!(cfg.dt > 0.0)) fail_key("dt", "must be positive");
        }
    }
    if (j.contains("integrator")) {
        std::string s = require_string(j["integrator"], "integrator");
        if (s == "rk4")
            cfg.integrator = Integrator::Rk4;
        else if (s == "imex")
            cfg.integrator = Integrator::Imex;
        else
            fail_key("integrator", "expected \"rk4\" or \"imex\"");
    }
    if (j.contains("perturbation")) {
        std::string s = require_string(j["perturbation"], "perturbation");
        if (s != "random" && s != "hamiltonian" && s != "shear" && s != "none")
            fail_key("perturbation",
                     "expected one of \"random\", \"hamiltonian\", \"shear\", \"none\"");
        cfg.perturbation = s;
    }
    if (j.contains("amplitude")) {
        cfg.amplitude = require_number(j["amplitude"], "amplitude");
        if (cfg.amplitude < 0.0) fail_key("amplitude", "must be non-negative");
    }
    if (j.contains("seed")) {
        long s = require_integer(j["seed"], "seed");
        if (s < 0) fail_key("seed", "must be non-negative");
        cfg.seed = static_cast<unsigned long>(s);
    }
    if (j.contains("modes_max")) {
        long m = require_integer(j["modes_max"], "modes_max");
        if (m < 0) fail_key("modes_max", "must be non-negative");
        cfg.modes_max = static_cast<int>(m);
    }
    if (j.contains("inverse_tol")) {
        cfg.inverse_tol = require_number(j["inverse_tol"], "inverse_tol");
        if (!(cfg.inverse_tol > 0.0)) fail_key("inverse_tol", "must be positive");
    }
    if (j.contains("interp")) {
        std::string s = require_string(j["interp"], "interp");
        if (s == "auto")
            cfg.interp = InterpMode::Auto;
        else if (s == "exact")
            cfg.interp = InterpMode::Exact;
        else if (s == "refined")
            cfg.interp = InterpMode::Refined;
        else
            fail_key("interp", "expected \"auto\", \"exact\" or \"refined\"");
    }
    if (j.contains("phi_stop_ratio")) {
        cfg.phi_stop_ratio = require_number(j["phi_stop_ratio"], "phi_stop_ratio");
        if (cfg.phi_stop_ratio < 0.0 || cfg.phi_stop_ratio >= 1.0)
            fail_key("phi_stop_ratio", "must lie in [0, 1)");
    }
    if (j.contains("snapshot_stride")) {
        long s = require_integer(j["snapshot_stride"], "snapshot_stride");
        if (s < 0) fail_key("snapshot_stride", "must be non-negative");
        cfg.snapshot_stride = static_cast<int>(s);
    }
    if (j.contains("gauge_check")) {
        if (!j["gauge_check"].is_boolean()) fail_key("gauge_check", "expected a boolean");
        cfg.gauge_check = j["gauge_check"].get<bool>();
    }
    if (j.contains("out")) cfg.out_dir = require_string(j["out"], "out");
    if (j.contains("csv")) {
        cfg.csv = require_string(j["csv"], "csv");
        if (cfg.csv.empty()) fail_key("csv", "must be a non-empty file name");
    }

    if (cfg.modes_max > cfg.n / 2)
        fail_key("modes_max", "band limit exceeds the grid Nyquist range");
    return cfg;
}

json apply_overrides(json j, const std::vector<std::string>& overrides) {
    for (const std::string& ov : overrides) {
        auto eq = ov.find('=');
        if (eq == std::string::npos || eq == 0)
            throw std::runtime_error("override '" + ov + "': expected key=value");
        std::string key = ov.substr(0, eq);
        std::string val = ov.substr(eq + 1);
        json parsed = json::parse(val, nullptr, false);
        if (parsed.is_discarded() || parsed.is_object() || parsed.is_array())
            parsed = json(val);  // bare words become strings (e.g. dt=auto)
        j[key] = parsed;
    }
    return j;
}

void write_doubles(std::ofstream& out, const double* v, std::size_t count) {
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(v), static_cast<std::streamsize>(count * 8));
    } else {
        for (std::size_t i = 0; i < count; i++) {
            std::uint64_t bits;
            std::memcpy(&bits, &v[i], 8);
            char b[8];
            for (int k = 0; k < 8; k++) b[k] = static_cast<char>((bits >> (8 * k)) & 0xff);
            out.write(b, 8);
        }
    }
}

void read_doubles(std::ifstream& in, double* v, std::size_t count) {
    if constexpr (std::endian::native == std::endian::little) {
        in.read(reinterpret_cast<char*>(v), static_cast<std::streamsize>(count * 8));
    } else {
        for (std::size_t i = 0; i < count; i++) {
            unsigned char b[8];
            in.read(reinterpret_cast<char*>(b), 8);
            std::uint64_t bits = 0;
            for (int k = 0; k < 8; k++) bits |= static_cast<std::uint64_t>(b[k]) << (8 * k);
            std::memcpy(&v[i], &bits, 8);
        }
    }
}

}  // namespace

RunConfig parse_config_text(const std::string& json_text,
                            const std::vector<std::string>& overrides) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("config: ") + e.what());
    }
    return config_from_json(apply_overrides(std::move(j), overrides));
}

RunConfig parse_config(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config_text(text, overrides);
}

TorusMap initial_map_from_config(const RunConfig& cfg) {
    TorusGrid g = make_grid(cfg.dim, cfg.n);
    if (cfg.perturbation == "none" || cfg.amplitude == 0.0) return identity_map(g);
    TorusMap f(g);
    if (cfg.perturbation == "random") {
        f = random_initial_map(g, cfg.amplitude, cfg.seed, cfg.modes_max);
    } else if (cfg.perturbation == "shear") {
        f = shear_symplectomorphism(g, cfg.amplitude, cfg.seed, cfg.interp);
    } else {  // hamiltonian: time-1 flow of a random band-limited Hamiltonian
        Rng rng(cfg.seed);
        int kmax = cfg.modes_max > 0 ? cfg.modes_max : std::max(1, cfg.n / 8);
        ScalarField h = random_band_limited(g, kmax, cfg.amplitude, rng);
        f = hamiltonian_map(h, 32, cfg.interp);
    }
    if (min_value(map_density(f)) <= 0.0)
        fail_key("amplitude", "initial map is not orientation-preserving at this grid size");
    return f;
}

FlowOptions flow_options_from_config(const RunConfig& cfg) {
    FlowOptions opt;
    opt.t_end = cfg.t_end;
    opt.dt = cfg.dt;
    opt.integrator = cfg.integrator;
    opt.inverse_tol = cfg.inverse_tol;
    opt.interp = cfg.interp;
    opt.phi_stop_ratio = cfg.phi_stop_ratio;
    opt.store_gauge_data = cfg.gauge_check;
    return opt;
}

void write_csv(const std::string& path, const std::vector<StepRecord>& history) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("csv: cannot open '" + path + "' for writing");
    out << "t,phi,mu_inf,minH,gradnorm,dt,residual\n";
    char buf[512];
    for (const StepRecord& r : history) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.t,
                      r.phi, r.mu_inf, r.min_h, r.grad_norm, r.dt, r.residual);
        out << buf;
    }
    if (!out) throw std::runtime_error("csv: write to '" + path + "' failed");
}

void write_field_components(const std::string& base,
                            const std::vector<const ScalarField*>& components,
                            const std::vector<std::string>& names) {
    if (components.empty() || components.size() != names.size())
        throw std::invalid_argument("snapshot: component/name count mismatch");
    const TorusGrid& g = components[0]->grid();

    std::ofstream bin(base + ".f64", std::ios::binary | std::ios::trunc);
    if (!bin) throw std::runtime_error("snapshot: cannot open '" + base + ".f64'");
    for (const ScalarField* f : components) {
        if (f->grid().dim != g.dim || f->grid().n != g.n)
            throw std::invalid_argument("snapshot: components live on different grids");
        write_doubles(bin, f->data(), f->size());
    }
    if (!bin) throw std::runtime_error("snapshot: write to '" + base + ".f64' failed");
    bin.close();

    json meta;
    meta["dim"] = g.dim;
    meta["n_per_axis"] = g.n;
    meta["components"] = names;
    write_text_file(base + ".json", meta.dump(2) + "\n");
}

std::vector<ScalarField> read_field_components(const std::string& base,
                                               std::vector<std::string>* names) {
    std::ifstream metain(base + ".json");
    if (!metain) throw std::runtime_error("snapshot: cannot open '" + base + ".json'");
    json meta;
    try {
        meta = json::parse(metain);
    } catch (const json::parse_error& e) {
        throw std::runtime_error("snapshot sidecar '" + base + ".json': " + e.what());
    }
    TorusGrid g = make_grid(meta.at("dim").get<int>(), meta.at("n_per_axis").get<int>());
    std::vector<std::string> comp_names = meta.at("components").get<std::vector<std::string>>();
    if (names) *names = comp_names;

    std::ifstream bin(base + ".f64", std::ios::binary);
    if (!bin) throw std::runtime_error("snapshot: cannot open '" + base + ".f64'");
    std::vector<ScalarField> out;
    out.reserve(comp_names.size());
    for (std::size_t c = 0; c < comp_names.size(); c++) {
        ScalarField f(g);
        read_doubles(bin, f.data(), f.size());
        if (!bin) throw std::runtime_error("snapshot: '" + base + ".f64' is truncated");
        out.push_back(std::move(f));
    }
    bin.peek();
    if (!bin.eof()) throw std::runtime_error("snapshot: '" + base + ".f64' has trailing data");
    return out;
}

void write_map_snapshot(const std::string& base, const TorusMap& f) {
    std::vector<const ScalarField*> comps;
    std::vector<std::string> names;
    for (int a = 0; a < f.grid().dim; a++) {
        comps.push_back(&f.displacement()[a]);
        names.push_back("u" + std::to_string(a));
    }
    write_field_components(base, comps, names);
}

TorusMap read_map_snapshot(const std::string& base) {
    std::vector<std::string> names;
    std::vector<ScalarField> comps = read_field_components(base, &names);
    const TorusGrid& g = comps[0].grid();
    if (static_cast<int>(comps.size()) != g.dim)
        throw std::runtime_error("snapshot: expected one displacement component per axis");
    TorusMap f(g);
    for (int a = 0; a < g.dim; a++) f.displacement()[a] = comps[static_cast<std::size_t>(a)];
    return f;
}

void write_kform_snapshot(const std::string& base, const KForm& alpha) {
    std::vector<const ScalarField*> comps;
    std::vector<std::string> names;
    if (alpha.degree() == 0) {
        comps.push_back(&alpha.comp(0));
        names.push_back("f");
    } else {
        const auto& tuples = index_tuples(alpha.grid().dim, alpha.degree());
        for (int i = 0; i < alpha.component_count(); i++) {
            comps.push_back(&alpha.comp(i));
            std::string name = "dx";
            for (int a = 0; a < alpha.degree(); a++)
                name += std::to_string(tuples[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)]);
            names.push_back(name);
        }
    }
    write_field_components(base, comps, names);
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace torusflow
