#pragma once

// Configuration parsing and on-disk interchange formats.
//
// Run parameters come from a flat JSON object; command-line overrides of the
// form "key=value" are applied on top before validation.  Diagnostics go to
// CSV (one row per accepted step, 17 significant digits).  Field data goes to
// a pair of files per snapshot: <base>.f64 with the raw component streams as
// little-endian 64-bit floats in row-major axis order, and <base>.json with
// the grid shape and component names.

#include <string>
#include <vector>

#include "torusflow/flow.hpp"
#include "torusflow/forms.hpp"
#include "torusflow/grid.hpp"
#include "torusflow/maps.hpp"

namespace torusflow {

struct RunConfig {
    int dim = 2;
    int n = 32;
    double t_end = 1.0;
    double dt = 0.0;  // 0 = automatic step selection ("auto" in JSON)
    Integrator integrator = Integrator::Rk4;
    std::string perturbation = "random";  // random | hamiltonian | shear | none
    double amplitude = 0.05;
    unsigned long seed = 1;
    int modes_max = 0;  // band limit of generated data; 0 = n/8
    double inverse_tol = 1e-10;
    InterpMode interp = InterpMode::Auto;
    double phi_stop_ratio = 0.0;  // stop early once phi/phi0 falls below this
    int snapshot_stride = 0;      // write a map snapshot every k accepted steps
    bool gauge_check = false;     // store gauge data and run the residual study
    std::string out_dir = ".";
    std::string csv = "flow.csv";
};

// Parses and validates a config file.  Throws std::runtime_error with a
// message naming the offending key on validation failure, or with parser
// position info when the file is not well-formed JSON.
RunConfig parse_config(const std::string& path,
                       const std::vector<std::string>& overrides = {});

// Same, but from an in-memory JSON string (used by tests and the Python
// bindings).
RunConfig parse_config_text(const std::string& json_text,
                            const std::vector<std::string>& overrides = {});

// Builds the initial map requested by the config (see RunConfig::perturbation).
TorusMap initial_map_from_config(const RunConfig& cfg);

// Translates the run parameters into integrator options.
FlowOptions flow_options_from_config(const RunConfig& cfg);

// CSV diagnostics: header t,phi,mu_inf,minH,gradnorm,dt,residual.
void write_csv(const std::string& path, const std::vector<StepRecord>& history);

// Generic snapshot writer/reader.  Components are concatenated in the binary
// stream in the order given; names end up in the sidecar.
void write_field_components(const std::string& base,
                            const std::vector<const ScalarField*>& components,
                            const std::vector<std::string>& names);
std::vector<ScalarField> read_field_components(const std::string& base,
                                               std::vector<std::string>* names = nullptr);

// A map snapshot stores the displacement components u0..u(d-1).
void write_map_snapshot(const std::string& base, const TorusMap& f);
TorusMap read_map_snapshot(const std::string& base);

// A k-form snapshot stores one stream per increasing multi-index, in
// lexicographic order; the sidecar lists the multi-indices as digit strings.
void write_kform_snapshot(const std::string& base, const KForm& alpha);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace torusflow
