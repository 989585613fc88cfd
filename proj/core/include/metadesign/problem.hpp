#pragma once

#include <filesystem>
#include <string>

#include "metadesign/macro_fem.hpp"
#include "metadesign/macro_opt.hpp"

namespace metadesign {

/// A macro design case as read from a problem file:
///
///   nx = 10
///   ny = 4
///   mode = database          # or family
///   curve = graded_isotropic
///   dirichlet = <node> <axis> <value>
///   load = <node> <axis> <value>
///   interest = <node> <axis> <target>
///
/// The last three keys repeat. Axis is 0 (x) or 1 (y).
struct ProblemDefinition {
    MacroProblem problem;
    OptimConfig::Mode mode = OptimConfig::Mode::database;
    std::string curve = "graded_isotropic";
};

/// Throws FormatError with the line number, or DomainError from validation.
ProblemDefinition parse_problem(const std::string& text);
ProblemDefinition load_problem(const std::filesystem::path& path);
std::string format_problem(const ProblemDefinition& def);
void save_problem(const ProblemDefinition& def, const std::filesystem::path& path);

/// Beam under horizontal compression: the left edge is held in x with the
/// bottom-left node also held in y, the right edge is pushed by
/// `compression` in -x. The top-edge nodes should rise by
/// amplitude * sin(pi x / nx), a bridge-like profile.
MacroProblem bridge_problem(int nx, int ny, double compression = 0.1, double amplitude = 0.05);

/// "desk-4x10" and "desk-8x12" resolve to bridge problems; anything else is
/// read as a problem file path.
ProblemDefinition resolve_problem(const std::string& name_or_path);

}  // namespace metadesign
