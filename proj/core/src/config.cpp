#include "metadesign/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "metadesign/error.hpp"

namespace metadesign {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const ConfigEntry& e, const std::string& expected) {
    throw ConfigError("[" + e.section + "] " + e.key + " = '" + e.value + "': expected " + expected + " (line " +
                      std::to_string(e.line) + ")");
}

template <class T>
T parse_integer(const ConfigEntry& e) {
    T v{};
    const auto* end = e.value.data() + e.value.size();
    auto [p, ec] = std::from_chars(e.value.data(), end, v);
    if (ec != std::errc() || p != end) bad_value(e, "an integer");
    return v;
}

double parse_real(const ConfigEntry& e) {
    std::istringstream is(e.value);
    is.imbue(std::locale::classic());
    double v = 0.0;
    if (!(is >> v) || !is.eof() || !std::isfinite(v)) bad_value(e, "a finite number");
    return v;
}

bool parse_bool(const ConfigEntry& e) {
    if (e.value == "true" || e.value == "1") return true;
    if (e.value == "false" || e.value == "0") return false;
    bad_value(e, "true or false");
}

std::vector<int> parse_int_list(const ConfigEntry& e) {
    std::vector<int> out;
    std::stringstream ss(e.value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        ConfigEntry sub = e;
        sub.value = trim(item);
        out.push_back(parse_integer<int>(sub));
    }
    if (out.empty()) bad_value(e, "a comma-separated integer list");
    return out;
}

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string format_list(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

struct Field {
    std::function<void(RunConfig&, const ConfigEntry&)> set;
    std::function<std::string(const RunConfig&)> get;
};

using Table = std::vector<std::pair<std::string, std::vector<std::pair<std::string, Field>>>>;

#define MD_INT(expr)                                                                            \
    Field {                                                                                     \
        [](RunConfig& c, const ConfigEntry& e) { c.expr = parse_integer<decltype(c.expr)>(e); }, \
            [](const RunConfig& c) { return std::to_string(c.expr); }                           \
    }
#define MD_REAL(expr)                                                          \
    Field {                                                                    \
        [](RunConfig& c, const ConfigEntry& e) { c.expr = parse_real(e); },    \
            [](const RunConfig& c) { return format_real(c.expr); }             \
    }
#define MD_BOOL(expr)                                                                      \
    Field {                                                                                \
        [](RunConfig& c, const ConfigEntry& e) { c.expr = parse_bool(e); },                \
            [](const RunConfig& c) { return std::string(c.expr ? "true" : "false"); }      \
    }
#define MD_LIST(expr)                                                            \
    Field {                                                                      \
        [](RunConfig& c, const ConfigEntry& e) { c.expr = parse_int_list(e); },  \
            [](const RunConfig& c) { return format_list(c.expr); }               \
    }
#define MD_STRING(expr)                                                    \
    Field {                                                                \
        [](RunConfig& c, const ConfigEntry& e) { c.expr = e.value; },      \
            [](const RunConfig& c) { return c.expr; }                      \
    }

const Table& table() {
    static const Table t = {
        {"run", {{"rng_seed", MD_INT(rng_seed)}, {"threads", MD_INT(threads)}}},
        {"database",
         {{"height", MD_INT(database.height)},
          {"width", MD_INT(database.width)},
          {"iterations", MD_INT(database.iterations)},
          {"batch", MD_INT(database.batch)},
          {"retries", MD_INT(database.retries)},
          {"sparsity_radius", MD_REAL(database.sparsity_radius)},
          {"hull_directions", MD_INT(database.hull_directions)},
          {"transpose_closure", MD_BOOL(database.transpose_closure)},
          {"youngs_modulus", MD_REAL(database.material.youngs_modulus)},
          {"poisson_ratio", MD_REAL(database.material.poisson_ratio)},
          {"void_stiffness_ratio", MD_REAL(database.material.void_stiffness_ratio)}}},
        {"training",
         {{"epochs", MD_INT(training.epochs)},
          {"batch_size", MD_INT(training.batch_size)},
          {"learning_rate", MD_REAL(training.learning_rate)},
          {"optimizer",
           Field{[](RunConfig& c, const ConfigEntry& e) {
                     if (e.value == "rmsprop") c.training.optimizer = nn::Optimizer::Kind::rmsprop;
                     else if (e.value == "adam") c.training.optimizer = nn::Optimizer::Kind::adam;
                     else bad_value(e, "rmsprop or adam");
                 },
                 [](const RunConfig& c) {
                     return std::string(c.training.optimizer == nn::Optimizer::Kind::adam ? "adam" : "rmsprop");
                 }}},
          {"mc_samples", MD_INT(training.mc_samples)},
          {"validation_fraction", MD_REAL(training.validation_fraction)},
          {"regression_weight", MD_REAL(training.regression_weight)},
          {"latent_dim", MD_INT(architecture.latent_dim)},
          {"encoder_channels", MD_LIST(architecture.encoder_channels)},
          {"decoder_base_channels", MD_INT(architecture.decoder_base_channels)},
          {"decoder_channels", MD_LIST(architecture.decoder_channels)},
          {"regressor_hidden", MD_LIST(architecture.regressor_hidden)}}},
        {"analyze",
         {{"arrow_quantile", MD_REAL(analyze.arrow_quantile)},
          {"starts", MD_INT(analyze.starts)},
          {"steps", MD_INT(analyze.steps)},
          {"step_size", MD_REAL(analyze.step_size)},
          {"pca_components", MD_INT(analyze.pca_components)}}},
        {"family",
         {{"curve", MD_STRING(family.curve)},
          {"delta", MD_REAL(family.delta)},
          {"neighbours", MD_INT(family.neighbours)},
          {"terminals", MD_INT(family.terminals)},
          {"count", MD_INT(family.count)},
          {"samples_per_edge", MD_INT(family.samples_per_edge)}}},
        {"design",
         {{"problem", MD_STRING(design.problem)},
          {"mode",
           Field{[](RunConfig& c, const ConfigEntry& e) {
                     if (e.value == "database") c.design.optim.mode = OptimConfig::Mode::database;
                     else if (e.value == "family") c.design.optim.mode = OptimConfig::Mode::family;
                     else bad_value(e, "database or family");
                 },
                 [](const RunConfig& c) {
                     return std::string(c.design.optim.mode == OptimConfig::Mode::family ? "family" : "database");
                 }}},
          {"beta", MD_REAL(design.optim.beta)},
          {"beta_continuation", MD_BOOL(design.optim.beta_continuation)},
          {"beta_start", MD_REAL(design.optim.beta_start)},
          {"beta_end", MD_REAL(design.optim.beta_end)},
          {"beta_interval", MD_INT(design.optim.beta_interval)},
          {"max_iters", MD_INT(design.optim.max_iters)},
          {"move_tolerance", MD_REAL(design.optim.move_tolerance)},
          {"move_limit", MD_REAL(design.optim.mma.move_limit)},
          {"restore_feasibility", MD_BOOL(design.optim.restore_feasibility)},
          {"sdf_resolution", MD_INT(design.sdf.resolution)},
          {"sdf_margin", MD_REAL(design.sdf.margin)},
          {"sdf_occupancy_radius", MD_REAL(design.sdf.occupancy_radius)}}},
        {"assembly",
         {{"candidates", MD_INT(assembly.candidates)},
          {"admission_mse", MD_REAL(assembly.admission_mse)},
          {"pool_cap", MD_INT(assembly.pool_cap)},
          {"max_relaxations", MD_INT(assembly.max_relaxations)},
          {"max_iters", MD_INT(assembly.max_iters)},
          {"geometric_weight", MD_REAL(assembly.geometric_weight)},
          {"mechanical_weight", MD_REAL(assembly.mechanical_weight)}}},
    };
    return t;
}

#undef MD_INT
#undef MD_REAL
#undef MD_BOOL
#undef MD_LIST
#undef MD_STRING

const Field* find_field(const std::string& section, const std::string& key, bool& section_known) {
    section_known = false;
    for (const auto& [name, fields] : table()) {
        if (name != section) continue;
        section_known = true;
        for (const auto& [k, f] : fields)
            if (k == key) return &f;
    }
    return nullptr;
}

void require(bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw ConfigError(key + ": " + what);
}

}  // namespace

void RunConfig::validate() const {
    require(threads >= 0, "run.threads", "must be >= 0");
    require(database.height > 0 && database.height % 2 == 0, "database.height", "must be positive and even");
    require(database.width > 0 && database.width % 2 == 0, "database.width", "must be positive and even");
    require(database.iterations >= 0, "database.iterations", "must be >= 0");
    require(database.batch >= 1, "database.batch", "must be >= 1");
    require(database.retries >= 1, "database.retries", "must be >= 1");
    require(database.sparsity_radius > 0, "database.sparsity_radius", "must be positive");
    require(database.hull_directions >= 8, "database.hull_directions", "must be >= 8");
    try {
        database.material.validate();
        training.validate();
        design.optim.validate();
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    require(architecture.height == database.height && architecture.width == database.width, "training",
            "architecture grid must match the database grid");
    try {
        architecture.validate();
    } catch (const Error& e) {
        throw ConfigError(std::string("training: ") + e.what());
    }
    require(analyze.arrow_quantile > 0 && analyze.arrow_quantile <= 0.5, "analyze.arrow_quantile",
            "must lie in (0, 0.5]");
    require(analyze.starts >= 1, "analyze.starts", "must be >= 1");
    require(analyze.steps >= 1, "analyze.steps", "must be >= 1");
    require(analyze.step_size > 0, "analyze.step_size", "must be positive");
    require(analyze.pca_components >= 1, "analyze.pca_components", "must be >= 1");
    require(family.curve == "graded_isotropic", "family.curve", "only graded_isotropic is built in");
    require(family.delta > 0, "family.delta", "must be positive");
    require(family.neighbours >= 1, "family.neighbours", "must be >= 1");
    require(family.terminals >= 1, "family.terminals", "must be >= 1");
    require(family.count >= 1, "family.count", "must be >= 1");
    require(family.samples_per_edge >= 0, "family.samples_per_edge", "must be >= 0");
    require(!design.problem.empty(), "design.problem", "must not be empty");
    require(design.sdf.resolution >= 3, "design.sdf_resolution", "must be >= 3");
    require(design.sdf.margin >= 0, "design.sdf_margin", "must be >= 0");
    require(design.sdf.occupancy_radius > 0, "design.sdf_occupancy_radius", "must be positive");
    require(assembly.candidates >= 1, "assembly.candidates", "must be >= 1");
    require(assembly.admission_mse > 0, "assembly.admission_mse", "must be positive");
    require(assembly.pool_cap >= static_cast<std::size_t>(assembly.candidates), "assembly.pool_cap",
            "must be >= candidates");
    require(assembly.max_relaxations >= 0, "assembly.max_relaxations", "must be >= 0");
    require(assembly.max_iters >= 1, "assembly.max_iters", "must be >= 1");
    require(assembly.geometric_weight >= 0 && assembly.mechanical_weight >= 0, "assembly",
            "incompatibility weights must be >= 0");
}

std::vector<ConfigEntry> parse_config_entries(const std::string& text) {
    std::vector<ConfigEntry> out;
    std::istringstream in(text);
    std::string raw, section;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']' || s.size() < 3)
                throw ConfigError("malformed section header (line " + std::to_string(line) + ")");
            section = trim(s.substr(1, s.size() - 2));
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected 'key = value' (line " + std::to_string(line) + ")");
        ConfigEntry e{section, trim(s.substr(0, eq)), trim(s.substr(eq + 1)), line};
        if (e.key.empty()) throw ConfigError("empty key (line " + std::to_string(line) + ")");
        if (e.section.empty())
            throw ConfigError("key '" + e.key + "' outside any section (line " + std::to_string(line) + ")");
        out.push_back(std::move(e));
    }
    return out;
}

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    bool have_seed = false;
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& e : parse_config_entries(text)) {
        bool section_known = false;
        const Field* f = find_field(e.section, e.key, section_known);
        if (!section_known)
            throw ConfigError("unknown section [" + e.section + "] (line " + std::to_string(e.line) + ")");
        if (!f)
            throw ConfigError("unknown key '" + e.key + "' in [" + e.section + "] (line " + std::to_string(e.line) +
                              ")");
        if (!seen.emplace(e.section, e.key).second)
            throw ConfigError("duplicate key '" + e.key + "' in [" + e.section + "] (line " +
                              std::to_string(e.line) + ")");
        f->set(cfg, e);
        if (e.section == "run" && e.key == "rng_seed") have_seed = true;
    }
    if (!have_seed) throw ConfigError("missing mandatory key rng_seed in [run]");
    cfg.architecture.height = cfg.database.height;
    cfg.architecture.width = cfg.database.width;
    cfg.training.rng_seed = cfg.rng_seed;
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string format_config(const RunConfig& cfg) {
    std::string out;
    for (const auto& [section, fields] : table()) {
        if (!out.empty()) out += "\n";
        out += "[" + section + "]\n";
        for (const auto& [key, f] : fields) out += key + " = " + f.get(cfg) + "\n";
    }
    return out;
}

}  // namespace metadesign
