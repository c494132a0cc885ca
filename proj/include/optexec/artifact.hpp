#pragma once

#include <string>
#include <vector>

#include "optexec/grid.hpp"
#include "optexec/model.hpp"
#include "optexec/policy.hpp"
#include "optexec/solver.hpp"

namespace optexec {

inline constexpr int kArtifactFormatVersion = 1;

/// Everything a simulation needs from a solve, plus provenance.
///
/// On disk: a UTF-8 header of `key = value` lines in [sections], terminated
/// by a line `end_header`, followed by the binary payload in the order the
/// [payload] section lists it. All binary values are little-endian.
struct SolveArtifact {
    int format_version = kArtifactFormatVersion;
    ModelParams params;
    SolverOptions solver;
    Discretization grid;
    PolicyGrid policy;
    ValueSurface phi0;
    std::vector<int> iterations;   // per time step
    std::vector<double> residuals; // per time step
};

SolveArtifact make_artifact(const Model& model, const SolverOptions& options, SolveResult result);

/// Writes to a temporary file next to `path` and renames it into place.
void save_artifact(const SolveArtifact& artifact, const std::string& path);

/// Throws IoError on unreadable files, unsupported versions or payload
/// length mismatches.
SolveArtifact load_artifact(const std::string& path);

/// Throws ParamsMismatchError naming the first key whose canonical text differs.
void check_params_match(const SolveArtifact& artifact, const ModelParams& params);

}  // namespace optexec
