#pragma once

// JSON run configuration. Layout (all sections but schema and model optional):
//
//   { "schema": "dcc-lab/1",
//     "model": { "V0": [...], "A": [[[...]]], "B": ..., "W0": [[...]], "M": ..., "N": ... }
//          or  { "scalar": { "m": 2, "a": [..], "b": [..], "m_coefs" | "m_coefs_squared": [..],
//                            "n_coefs" | "n_coefs_squared": [..], "v0": .., "W0": [[..]] } },
//     "innovations": { "family": "gaussian" | "student_t", "dof", "standardization", "seed", "stream" },
//     "sim": { "horizon", "burn_in", "Q0", "h0", "explode_threshold", "stride" },
//     "checks": { "norm": "induced_inf" | "spectral", "uniqueness", "require_uniqueness" },
//     "mc": { "horizon", "replications", "samples" },
//     "experiment": { "m_squared": [..], "n_squared", "innovations": [..], "runs", "horizon", "burn_in" },
//     "output": { "dir", "formats": ["json", "text", "csv"] } }
//
// Matrices are row-major nested arrays. Unknown keys are errors.

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dcc/innovations.hpp"
#include "dcc/model.hpp"
#include "dcc/simulator.hpp"
#include "dcc/stationarity.hpp"

namespace dcc {

inline constexpr const char* kSchemaVersion = "dcc-lab/1";

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, std::size_t line, const std::string& message);

    const std::string& field() const { return field_; }
    std::size_t line() const { return line_; }  // 0 when unknown

private:
    std::string field_;
    std::size_t line_;
};

struct CheckSettings {
    NormKind norm = NormKind::InducedInf;
    bool uniqueness = true;
    // When set, `check` exits non-zero unless uniqueness is established too.
    bool require_uniqueness = false;
};

struct ExperimentSettings {
    std::vector<double> m_squared{0.999, 1.001};
    double n_squared = 3.0;
    std::vector<InnovationSpec> innovations;  // defaults: Gaussian, t(1.2), t(1.5), t(2.5), t(4)
    std::size_t runs = 20;
    std::size_t horizon = 10000;
    std::size_t burn_in = 4000;
};

struct OutputSettings {
    std::string dir = ".";
    std::vector<std::string> formats{"json", "text", "csv"};

    bool wants(const std::string& format) const;
};

struct RunConfig {
    DccSpec model;
    InnovationSpec innovations;
    SimConfig sim;
    CheckSettings checks;
    McSettings mc;
    ExperimentSettings experiment;
    OutputSettings output;
};

/// Declared defaults for the reference grid.
std::vector<InnovationSpec> default_experiment_innovations();

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);  // IoError when unreadable

/// Full-matrix form; parse_config(serialize_config(c)) reproduces c.
std::string serialize_config(const RunConfig& cfg);

}  // namespace dcc
