#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "metadesign/homogenization.hpp"
#include "metadesign/latent_model.hpp"
#include "metadesign/macro_opt.hpp"

namespace metadesign {

/// Settings for database growth.
struct DatabaseSettings {
    int height = 50;
    int width = 50;
    int iterations = 200;
    int batch = 10;
    int retries = 3;
    double sparsity_radius = 0.1;
    int hull_directions = 64;
    bool transpose_closure = false;
    MaterialSpec material;
};

struct AnalyzeSettings {
    double arrow_quantile = 0.30;
    int starts = 10;
    int steps = 4;           // traversal uses i = -steps..steps
    double step_size = 0.5;  // latent units per step
    int pca_components = 2;
};

struct FamilySettings {
    std::string curve = "graded_isotropic";
    double delta = 0.05;
    int neighbours = 5;
    int terminals = 50;
    int count = 3;
    int samples_per_edge = 2;
};

struct DesignSettings {
    std::string problem = "desk-4x10";  // builtin name or path to a problem file
    OptimConfig optim;
    SdfOptions sdf;
};

struct AssemblySettings {
    int candidates = 10;
    double admission_mse = 0.01;
    std::size_t pool_cap = 200;
    int max_relaxations = 3;
    int max_iters = 5000;
    double geometric_weight = 1.0;
    double mechanical_weight = 1.0;
};

/// Whole-run configuration: `[section]` headers followed by `key = value`
/// lines, `#` comments. Every key must be known; `rng_seed` in `[run]` is
/// mandatory.
struct RunConfig {
    std::uint64_t rng_seed = 0;
    int threads = 0;  // 0 = hardware concurrency
    DatabaseSettings database;
    TrainingConfig training;
    Architecture architecture;
    AnalyzeSettings analyze;
    FamilySettings family;
    DesignSettings design;
    AssemblySettings assembly;

    /// Throws ConfigError naming the offending key.
    void validate() const;
};

/// Raw section -> key -> value view of a config file, in file order.
struct ConfigEntry {
    std::string section;
    std::string key;
    std::string value;
    std::size_t line = 0;
};
std::vector<ConfigEntry> parse_config_entries(const std::string& text);

/// Throws ConfigError on syntax errors, unknown sections or keys, bad
/// values, duplicate keys, or a missing rng_seed.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical text form; parse_config(format_config(c)) reproduces c.
std::string format_config(const RunConfig& cfg);

}  // namespace metadesign
