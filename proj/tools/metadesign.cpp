// metadesign: command-line front end for the design pipeline.

#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "metadesign/config.hpp"
#include "metadesign/database.hpp"
#include "metadesign/error.hpp"
#include "metadesign/latent_model.hpp"
#include "metadesign/parallel.hpp"
#include "metadesign/pipeline.hpp"

using namespace metadesign;

namespace {

constexpr int kRuntimeFailure = 1;
constexpr int kUsage = 2;

struct Common {
    std::string config;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
};

struct Inputs {
    std::string db;
    std::string weights;
    std::string field;
    std::vector<std::int64_t> ids;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "run configuration file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", c.out, "directory receiving run-<timestamp>/");
    cmd->add_option("--seed", c.seed, "overrides [run] rng_seed");
    cmd->add_option("--threads", c.threads, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
}

RunConfig resolve_config(const Common& c) {
    RunConfig cfg = load_config(c.config);
    if (c.seed) cfg.rng_seed = *c.seed;
    if (c.threads) cfg.threads = *c.threads;
    cfg.training.rng_seed = cfg.rng_seed;
    cfg.validate();
    if (cfg.threads > 0) set_worker_threads(static_cast<unsigned>(cfg.threads));
    return cfg;
}

Database read_db(RunDirectory& run, const std::string& path) {
    run.input("database", path);
    return load_database(path);
}

LatentModel read_weights(RunDirectory& run, const std::string& path) {
    run.input("weights", path);
    return load_weights(path);
}

const char* category(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return "config";
    if (dynamic_cast<const FormatError*>(&e)) return "format";
    if (dynamic_cast<const VersionMismatch*>(&e)) return "version";
    if (dynamic_cast<const ChecksumFailure*>(&e)) return "checksum";
    if (dynamic_cast<const NoFeasibleCandidate*>(&e)) return "no-candidate";
    if (dynamic_cast<const EmptySelection*>(&e)) return "empty-selection";
    if (dynamic_cast<const TrainingDivergence*>(&e)) return "divergence";
    if (dynamic_cast<const SolverFailure*>(&e)) return "solver";
    if (dynamic_cast<const DimensionError*>(&e)) return "dimension";
    if (dynamic_cast<const DomainError*>(&e)) return "domain";
    if (dynamic_cast<const Error*>(&e)) return "error";
    return "internal";
}

std::string one_line(std::string s) {
    for (char& ch : s)
        if (ch == '\n' || ch == '\r') ch = ' ';
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"metamaterial database, latent model and multiscale design pipeline", "metadesign"};
    app.require_subcommand(1);
    app.fallthrough(false);

    Common common;
    Inputs in;

    auto* gen = app.add_subcommand("gen-db", "grow a homogenized microstructure database");
    auto* trn = app.add_subcommand("train", "train the latent model and annotate the database");
    auto* ana = app.add_subcommand("analyze", "latent PCA, semantic arrows and traversals");
    auto* fam = app.add_subcommand("family", "extract graded families along the gradation curve");
    auto* des = app.add_subcommand("design-macro", "optimize the macro property field");
    auto* asm_ = app.add_subcommand("assemble", "choose compatible cells for an optimized field");
    auto* eva = app.add_subcommand("evaluate", "per-record reconstruction and property error");
    auto* ren = app.add_subcommand("render", "write database cells as PBM and SVG");
    for (auto* cmd : {gen, trn, ana, fam, des, asm_, eva, ren}) add_common(cmd, common);
    for (auto* cmd : {trn, ana, fam, des, asm_, eva, ren})
        cmd->add_option("--db", in.db, "database file")->required()->check(CLI::ExistingFile);
    for (auto* cmd : {ana, fam, eva})
        cmd->add_option("--weights", in.weights, "trained weights")->required()->check(CLI::ExistingFile);
    asm_->add_option("--field", in.field, "field.csv from design-macro")->required()->check(CLI::ExistingFile);
    ren->add_option("--ids", in.ids, "record ids (default: first 64)")->delimiter(',');

    auto known = [&app](const std::string& name) {
        for (const auto* sub : app.get_subcommands({}))
            if (sub->get_name() == name) return true;
        return false;
    };
    if (argc > 1 && argv[1][0] != '-' && !known(argv[1])) {
        std::cerr << "error: usage: unknown subcommand '" << argv[1] << "'\n" << app.help();
        return kUsage;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: usage: " << one_line(e.what()) << "\n" << app.help();
        return kUsage;
    }

    auto* cmd = app.get_subcommands().front();
    const std::string stage = cmd->get_name();
    try {
        RunConfig cfg;
        try {
            cfg = resolve_config(common);
        } catch (const ConfigError& e) {
            std::cerr << "error: config: " << one_line(e.what()) << "\n";
            return kUsage;
        }
        RunDirectory run = RunDirectory::create(common.out, stage);
        run.input("config", common.config);

        if (stage == "gen-db") {
            const auto r = run_gen_db(cfg, run);
            std::cout << "records " << r.db.size() << "\n";
        } else if (stage == "train") {
            const Database db = read_db(run, in.db);
            const auto r = run_train(cfg, db, run);
            std::cout << "validation pixel agreement " << r.validation.median_pixel_agreement
                      << ", property error " << r.validation.median_property_error << "\n";
        } else if (stage == "analyze") {
            const Database db = read_db(run, in.db);
            const LatentModel model = read_weights(run, in.weights);
            const auto r = run_analyze(cfg, db, model, run);
            std::cout << "traversals " << r.traversals.size() << "\n";
        } else if (stage == "family") {
            const Database db = read_db(run, in.db);
            const LatentModel model = read_weights(run, in.weights);
            const auto r = run_family(cfg, db, model, run);
            std::cout << "families " << r.extraction.families.size() << " from " << r.selected.size()
                      << " records near the curve\n";
        } else if (stage == "design-macro") {
            const Database db = read_db(run, in.db);
            const auto r = run_design(cfg, db, run);
            std::cout << "objective " << r.result.initial_objective << " -> " << r.result.final_objective << "\n";
        } else if (stage == "assemble") {
            const Database db = read_db(run, in.db);
            run.input("field", in.field);
            const auto field = read_field_csv(in.field);
            const auto r = run_assemble(cfg, db, field, run);
            std::cout << "assembled RRMSE " << r.stitch.rrmse << " (continuous " << r.continuous_rrmse << ")\n";
        } else if (stage == "evaluate") {
            const Database db = read_db(run, in.db);
            const LatentModel model = read_weights(run, in.weights);
            const auto r = run_evaluate(db, model, run);
            std::cout << "median pixel agreement " << r.median_pixel_agreement << ", property error "
                      << r.median_property_error << "\n";
        } else if (stage == "render") {
            const Database db = read_db(run, in.db);
            run_render(db, in.ids, run);
        }
        run.write_manifest(cfg);
        std::cout << run.path().string() << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << category(e) << ": " << one_line(e.what()) << "\n";
        return kRuntimeFailure;
    }
}
