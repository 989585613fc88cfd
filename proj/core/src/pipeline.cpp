#include "metadesign/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <random>
#include <sstream>

#include "metadesign/bitmap_codec.hpp"
#include "metadesign/error.hpp"
#include "metadesign/growth.hpp"
#include "metadesign/homogenization.hpp"
#include "metadesign/parallel.hpp"
#include "metadesign/render.hpp"
#include "metadesign/seeds.hpp"
#include "metadesign/signed_distance.hpp"

namespace metadesign {

namespace {

std::string real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string props_csv(const StiffnessComponents& c) {
    return real(c.c11) + "," + real(c.c12) + "," + real(c.c22) + "," + real(c.c33);
}

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw Error("cannot write " + p.string());
    return os;
}

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

StiffnessComponents homogenize_or_zero(const Microstructure& m, const MaterialSpec& mat) {
    if (m.solid_count() == 0) return {};
    return homogenize(m, mat);
}

std::vector<StiffnessComponents> homogenize_all(const std::vector<Microstructure>& cells, const MaterialSpec& mat) {
    std::vector<StiffnessComponents> out(cells.size());
    parallel_for(cells.size(), [&](std::size_t i) { out[i] = homogenize_or_zero(cells[i], mat); });
    return out;
}

std::string utc_stamp() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%d-%H%M%S", &tm);
    return buf;
}

const char* orientation_name(Orientation o) { return o == Orientation::horizontal ? "horizontal" : "vertical"; }

}  // namespace

std::string file_digest(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot read " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(ss.str())));
    return buf;
}

RunDirectory RunDirectory::create(const std::filesystem::path& root, const std::string& stage) {
    const std::string base = "run-" + utc_stamp();
    std::filesystem::create_directories(root);
    std::filesystem::path dir = root / base;
    for (int k = 2; std::filesystem::exists(dir); ++k) dir = root / (base + "-" + std::to_string(k));
    return RunDirectory(dir, stage);
}

RunDirectory::RunDirectory(std::filesystem::path dir, std::string stage) : dir_(std::move(dir)), stage_(std::move(stage)) {
    std::filesystem::create_directories(dir_);
}

void RunDirectory::input(const std::string& label, const std::filesystem::path& p) { inputs_.emplace_back(label, p); }

void RunDirectory::output(const std::string& name) {
    if (std::find(outputs_.begin(), outputs_.end(), name) == outputs_.end()) outputs_.push_back(name);
}

void RunDirectory::note(const std::string& key, const std::string& value) { notes_.emplace_back(key, value); }

void RunDirectory::write_manifest(const RunConfig& cfg) const {
    auto os = open_out(file("manifest.txt"));
    const std::string config_text = format_config(cfg);
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(config_text)));
    os << "stage " << stage_ << "\n";
    os << "created " << utc_stamp() << "\n";
    os << "seed " << cfg.rng_seed << "\n";
    os << "config " << buf << "\n";
    for (const auto& [label, p] : inputs_)
        os << "input " << label << " " << p.string() << " " << (std::filesystem::exists(p) ? file_digest(p) : "-")
           << "\n";
    for (const auto& name : outputs_) os << "output " << name << " " << file_digest(file(name)) << "\n";
    for (const auto& [k, v] : notes_) os << "note " << k << " " << v << "\n";
    os << "# resolved configuration\n";
    std::istringstream lines(config_text);
    for (std::string line; std::getline(lines, line);) os << "# " << line << "\n";
}

std::vector<StiffnessComponents> read_field_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot read field file " + path.string());
    std::vector<StiffnessComponents> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (lineno == 1) {
            if (line != "e,C11,C12,C22,C33") throw FormatError("unexpected field header", lineno);
            continue;
        }
        if (line.empty()) continue;
        std::array<double, 5> v{};
        std::istringstream ss(line);
        ss.imbue(std::locale::classic());
        std::string tok;
        std::size_t k = 0;
        while (std::getline(ss, tok, ',')) {
            if (k >= 5) throw FormatError("too many columns", lineno);
            try {
                std::size_t used = 0;
                v[k] = std::stod(tok, &used);
                if (used != tok.size()) throw std::invalid_argument(tok);
            } catch (const std::exception&) {
                throw FormatError("malformed number '" + tok + "'", lineno);
            }
            ++k;
        }
        if (k != 5) throw FormatError("expected 5 columns", lineno);
        if (static_cast<std::size_t>(v[0]) != out.size()) throw FormatError("element ids must be consecutive", lineno);
        out.push_back({v[1], v[2], v[3], v[4]});
    }
    if (out.empty()) throw FormatError("field file has no elements", lineno + 1);
    return out;
}

GradationCurve curve_by_name(const std::string& name, const MaterialSpec& mat, double delta) {
    if (name == "graded_isotropic") return GradationCurve::graded_isotropic(mat, delta);
    throw ConfigError("unknown gradation curve '" + name + "'");
}

GenDbResult run_gen_db(const RunConfig& cfg, RunDirectory& run) {
    const auto& s = cfg.database;
    GrowthOptions opts;
    opts.iterations = s.iterations;
    opts.batch = s.batch;
    opts.retries = s.retries;
    opts.sparsity_radius = s.sparsity_radius;
    opts.hull_directions = s.hull_directions;
    opts.material = s.material;
    opts.transpose_closure = s.transpose_closure;
    std::vector<std::pair<int, std::size_t>> growth;
    opts.progress = [&growth](int it, std::size_t n) { growth.emplace_back(it, n); };

    GenDbResult out;
    const auto seeds = seed_set(s.height, s.width);
    out.seed_count = seeds.size();
    DatabaseHeader header;
    header.height = s.height;
    header.width = s.width;
    header.latent_dim = cfg.architecture.latent_dim;
    out.db = grow_database(seeds, cfg.rng_seed, opts, header);

    save_database(out.db, run.file("database.txt"));
    run.output("database.txt");
    {
        auto os = open_out(run.file("properties.csv"));
        os << "id,C11,C12,C22,C33,volume_fraction\n";
        for (const auto& r : out.db.records())
            os << r.id << "," << props_csv(r.properties) << "," << real(r.cell.volume_fraction()) << "\n";
    }
    run.output("properties.csv");
    {
        auto os = open_out(run.file("growth.csv"));
        os << "iteration,records\n";
        for (const auto& [it, n] : growth) os << it << "," << n << "\n";
    }
    run.output("growth.csv");
    std::vector<double> x, y, c;
    for (const auto& r : out.db.records()) {
        x.push_back(r.properties.c11);
        y.push_back(r.properties.c22);
        c.push_back(r.properties.c12);
    }
    write_text(svg_scatter(x, y, c, "database properties (colour: C12)", "C11", "C22"), run.file("properties.svg"));
    run.output("properties.svg");
    run.note("records", std::to_string(out.db.size()));
    run.note("seeds", std::to_string(out.seed_count));
    return out;
}

TrainStageResult run_train(const RunConfig& cfg, const Database& db, RunDirectory& run) {
    TrainingConfig tc = cfg.training;
    tc.rng_seed = cfg.rng_seed;
    TrainingResult tr = train(db, tc, cfg.architecture);
    TrainStageResult out{std::move(tr.model), std::move(tr.history), {}, {}, {}};
    out.validation = evaluate_model(out.model, db, tr.validation_ids);
    const std::size_t nt = std::min<std::size_t>(200, tr.training_ids.size());
    out.training_sample = evaluate_model(
        out.model, db, std::vector<std::int64_t>(tr.training_ids.begin(), tr.training_ids.begin() + static_cast<long>(nt)));
    out.annotated = annotate_latents(db, out.model);

    save_weights(out.model, run.file("weights.bin"));
    run.output("weights.bin");
    write_loss_history(out.history, run.file("loss.csv"));
    run.output("loss.csv");
    {
        auto os = open_out(run.file("validation.csv"));
        os << "split,count,median_pixel_agreement,median_property_error\n";
        os << "validation," << out.validation.count << "," << real(out.validation.median_pixel_agreement) << ","
           << real(out.validation.median_property_error) << "\n";
        os << "training_sample," << out.training_sample.count << "," << real(out.training_sample.median_pixel_agreement)
           << "," << real(out.training_sample.median_property_error) << "\n";
    }
    run.output("validation.csv");
    save_database(out.annotated, run.file("database_latent.txt"));
    run.output("database_latent.txt");

    std::vector<Microstructure> strip;
    std::vector<std::string> captions;
    for (std::size_t i = 0; i < std::min<std::size_t>(6, tr.validation_ids.size()); ++i) {
        const auto& r = db.at_id(tr.validation_ids[i]);
        strip.push_back(r.cell);
        captions.push_back("#" + std::to_string(r.id));
        strip.push_back(reconstruct(r.cell, out.model));
        captions.push_back("recon");
    }
    write_text(svg_filmstrip(strip, captions), run.file("reconstructions.svg"));
    run.output("reconstructions.svg");
    run.note("parameters", std::to_string(out.model.parameter_count()));
    return out;
}

AnalyzeResult run_analyze(const RunConfig& cfg, const Database& annotated, const LatentModel& model, RunDirectory& run) {
    if (!annotated.fully_annotated()) throw DomainError("analyze needs a database with latent vectors");
    const auto& s = cfg.analyze;
    const MaterialSpec& mat = annotated.header.material;
    AnalyzeResult out;
    const auto latents = database_latents(annotated);
    out.pca = fit_pca(latents, std::min(s.pca_components, model.latent_dim()));
    {
        auto os = open_out(run.file("pca.csv"));
        os << "id";
        for (int k = 0; k < out.pca.component_count(); ++k) os << ",pc" << k + 1;
        os << ",C11,C12,C22,C33\n";
        std::vector<double> x, y, c;
        for (std::size_t i = 0; i < annotated.size(); ++i) {
            const auto& r = annotated.records()[i];
            const Eigen::VectorXd p = out.pca.project(latents[i]);
            os << r.id;
            for (Eigen::Index k = 0; k < p.size(); ++k) os << "," << real(p(k));
            os << "," << props_csv(r.properties) << "\n";
            x.push_back(p(0));
            y.push_back(p.size() > 1 ? p(1) : 0.0);
            c.push_back(r.properties.c11);
        }
        write_text(svg_scatter(x, y, c, "latent PCA (colour: C11)", "PC1", "PC2"), run.file("pca.svg"));
    }
    run.output("pca.csv");
    run.output("pca.svg");

    const auto mode = ArrowMode::quantile(s.arrow_quantile);
    out.c11_arrow = semantic_arrow(annotated, score_c11, mode, "C11");
    out.anisotropy_arrow = semantic_arrow(annotated, score_c11_over_c22, mode, "C11/C22");
    {
        auto os = open_out(run.file("arrows.csv"));
        os << "arrow,high_count,low_count";
        for (int j = 0; j < model.latent_dim(); ++j) os << ",z" << j + 1;
        os << "\n";
        for (const auto* a : {&out.c11_arrow, &out.anisotropy_arrow}) {
            os << a->criterion << "," << a->high_count << "," << a->low_count;
            for (double v : a->direction) os << "," << real(v);
            os << "\n";
        }
    }
    run.output("arrows.csv");

    // Distinct random start records.
    std::mt19937_64 rng(cfg.rng_seed);
    std::vector<std::size_t> starts;
    const auto nstarts = std::min<std::size_t>(static_cast<std::size_t>(s.starts), annotated.size());
    while (starts.size() < nstarts) {
        const std::size_t i = uniform_index(rng, annotated.size());
        if (std::find(starts.begin(), starts.end(), i) == starts.end()) starts.push_back(i);
    }
    std::vector<double> step_index;
    for (int i = -s.steps; i <= s.steps; ++i) step_index.push_back(i);
    for (const auto* arrow : {&out.c11_arrow, &out.anisotropy_arrow})
        for (std::size_t i : starts) {
            const auto& rec = annotated.records()[i];
            Traversal t;
            t.arrow = arrow->criterion;
            t.start_id = rec.id;
            t.cells = traverse(*rec.latent, *arrow, s.steps, s.step_size, model);
            t.properties = homogenize_all(t.cells, mat);
            std::vector<double> c11;
            for (const auto& p : t.properties) c11.push_back(p.c11);
            t.spearman_c11 = spearman(step_index, c11);
            const auto& f = t.properties.front();
            const auto& l = t.properties.back();
            t.flips_anisotropy = (f.c11 - f.c22) * (l.c11 - l.c22) < 0.0;
            out.traversals.push_back(std::move(t));
        }
    {
        auto os = open_out(run.file("traversals.csv"));
        os << "arrow,start_id,step,solid_pixels,C11,C12,C22,C33\n";
        for (const auto& t : out.traversals)
            for (std::size_t k = 0; k < t.cells.size(); ++k)
                os << t.arrow << "," << t.start_id << "," << static_cast<int>(k) - s.steps << ","
                   << t.cells[k].solid_count() << "," << props_csv(t.properties[k]) << "\n";
    }
    run.output("traversals.csv");
    for (const auto& [arrow, name] : {std::pair{&out.c11_arrow, "traversal_c11.svg"},
                                      std::pair{&out.anisotropy_arrow, "traversal_anisotropy.svg"}}) {
        for (const auto& t : out.traversals) {
            if (t.arrow != arrow->criterion) continue;
            std::vector<std::string> captions;
            for (const auto& p : t.properties) {
                char buf[48];
                std::snprintf(buf, sizeof buf, "%.2f/%.2f", p.c11, p.c22);
                captions.push_back(buf);
            }
            write_text(svg_filmstrip(t.cells, captions), run.file(name));
            run.output(name);
            break;
        }
    }
    for (const auto& w : out.pca.warnings) run.note("pca_warning", w);
    return out;
}

FamilyStageResult run_family(const RunConfig& cfg, const Database& annotated, const LatentModel& model,
                             RunDirectory& run) {
    if (!annotated.fully_annotated()) throw DomainError("family design needs a database with latent vectors");
    const auto& s = cfg.family;
    const auto curve = curve_by_name(s.curve, annotated.header.material, s.delta);
    const auto scaler = PropertyScaler::fit(annotated.properties());
    FamilyStageResult out;
    out.delta = s.delta;
    out.selected = select_near_curve(annotated, curve, scaler);
    const auto graph = build_family_graph(annotated, out.selected, s.neighbours, s.terminals);
    out.extraction = extract_families(graph, annotated, curve, scaler, s.count);
    DensifyOptions dopts;
    dopts.samples_per_edge = s.samples_per_edge;
    dopts.material = annotated.header.material;
    for (const auto& f : out.extraction.families) out.densified.push_back(densify_family(f, model, curve, scaler, dopts));

    auto write_members = [&](const std::vector<MetamaterialFamily>& fams, const std::string& name) {
        auto os = open_out(run.file(name));
        os << "family,position,id,inserted,C11,C12,C22,C33,curve_distance\n";
        for (std::size_t f = 0; f < fams.size(); ++f)
            for (std::size_t k = 0; k < fams[f].members.size(); ++k) {
                const auto& m = fams[f].members[k];
                os << f << "," << k << "," << (m.id ? *m.id : -1) << "," << (m.id ? 0 : 1) << ","
                   << props_csv(m.properties) << "," << real(m.curve_distance) << "\n";
            }
        run.output(name);
    };
    write_members(out.extraction.families, "families.csv");
    write_members(out.densified, "densified.csv");
    for (std::size_t f = 0; f < out.densified.size(); ++f) {
        std::vector<Microstructure> cells;
        std::vector<std::string> captions;
        for (const auto& m : out.densified[f].members) {
            cells.push_back(m.cell);
            char buf[48];
            std::snprintf(buf, sizeof buf, "%s%.3f", m.id ? "" : "*", m.properties.c11);
            captions.push_back(buf);
        }
        const std::string name = "family_" + std::to_string(f + 1) + ".svg";
        write_text(svg_filmstrip(cells, captions), run.file(name));
        run.output(name);
    }
    run.note("selected", std::to_string(out.selected.size()));
    run.note("families", std::to_string(out.extraction.families.size()));
    run.note("complete", out.extraction.complete ? "true" : "false");
    return out;
}

DesignStageResult run_design(const RunConfig& cfg, const Database& db, RunDirectory& run) {
    DesignStageResult out;
    out.definition = resolve_problem(cfg.design.problem);
    const OptimConfig& oc = cfg.design.optim;
    out.definition.mode = oc.mode;
    if (oc.mode == OptimConfig::Mode::database) {
        const auto props = db.properties();
        const auto sdf = build_sdf(props, cfg.design.sdf);
        out.result = optimize_properties(out.definition.problem, sdf, design_space(props), oc);
    } else {
        out.definition.curve = cfg.family.curve;
        const auto curve = curve_by_name(cfg.family.curve, db.header.material, cfg.family.delta);
        out.result = optimize_properties(out.definition.problem, curve, oc);
    }
    save_problem(out.definition, run.file("problem.txt"));
    run.output("problem.txt");
    write_history_csv(out.result.history, run.file("history.csv").string());
    run.output("history.csv");
    write_field_csv(out.result.field, run.file("field.csv").string());
    run.output("field.csv");
    if (!out.result.final_phi.empty()) {
        auto os = open_out(run.file("feasibility.csv"));
        os << "e,phi\n";
        for (std::size_t e = 0; e < out.result.final_phi.size(); ++e) os << e << "," << real(out.result.final_phi[e]) << "\n";
        run.output("feasibility.csv");
    }
    const auto& p = out.definition.problem;
    for (int k = 0; k < 4; ++k) {
        static const char* names[] = {"C11", "C12", "C22", "C33"};
        std::vector<double> v;
        for (const auto& c : out.result.field.values) v.push_back(c.to_array()[static_cast<std::size_t>(k)]);
        const std::string name = std::string("field_") + names[k] + ".svg";
        write_text(svg_heatmap(p.nx, p.ny, v, names[k]), run.file(name));
        run.output(name);
    }
    run.note("initial_objective", real(out.result.initial_objective));
    run.note("final_objective", real(out.result.final_objective));
    run.note("final_rrmse", real(out.result.final_rrmse));
    run.note("iterations", std::to_string(out.result.history.size()));
    run.note("converged", out.result.converged ? "true" : "false");
    return out;
}

AssembleStageResult run_assemble(const RunConfig& cfg, const Database& annotated,
                                 const std::vector<StiffnessComponents>& field, RunDirectory& run) {
    if (!annotated.fully_annotated()) throw DomainError("assembly needs a database with latent vectors");
    const auto def = resolve_problem(cfg.design.problem);
    const auto& problem = def.problem;
    const auto& s = cfg.assembly;
    AssembleStageResult out;

    AssemblyOptions opts;
    opts.candidates.n_clusters = s.candidates;
    opts.candidates.admission_mse = s.admission_mse;
    opts.candidates.pool_cap = s.pool_cap;
    opts.candidates.seed = cfg.rng_seed;
    opts.max_relaxations = s.max_relaxations;
    opts.geometric_weight = s.geometric_weight;
    opts.mechanical_weight = s.mechanical_weight;
    opts.material = annotated.header.material;
    const auto scaler = PropertyScaler::fit(annotated.properties());
    const auto pca = fit_pca(database_latents(annotated), 2);
    out.graph = build_assembly_graph(problem, field, annotated, scaler, pca, opts);

    DdOptions dd;
    dd.max_iters = s.max_iters;
    out.labeling = dd_mrf_solve(out.graph.to_mrf(), dd);
    out.stitch = stitch_and_evaluate(out.labeling.labels, out.graph, problem, annotated);
    const Eigen::VectorXd u = assemble_and_solve(problem, field);
    out.continuous_objective = objective_value(u, problem);
    out.continuous_rrmse = problem.target_vector().norm() > 0.0 ? objective_and_rrmse(u, problem).rrmse : 0.0;

    for (const auto& e : out.graph.edges) {
        const auto la = out.labeling.labels[static_cast<std::size_t>(e.a)];
        const auto lb = out.labeling.labels[static_cast<std::size_t>(e.b)];
        const auto& ca = annotated.at_id(out.stitch.ids[static_cast<std::size_t>(e.a)]).cell;
        const auto& cb = annotated.at_id(out.stitch.ids[static_cast<std::size_t>(e.b)]).cell;
        // b is right of a, or above it (bottom strip of b meets top strip of a).
        const auto sa = boundary_strip(ca, e.orientation == Orientation::horizontal ? Side::right : Side::top);
        const auto sb = boundary_strip(cb, e.orientation == Orientation::horizontal ? Side::left : Side::bottom);
        const bool load = std::any_of(sa.begin(), sa.end(), [](auto v) { return v != 0; }) &&
                          std::any_of(sb.begin(), sb.end(), [](auto v) { return v != 0; });
        out.boundaries.push_back({e.a, e.b, e.orientation, e.geometric(la, lb), e.mechanical(la, lb), load});
    }

    {
        auto os = open_out(run.file("labeling.csv"));
        os << "row,col,id\n";
        for (int e = 0; e < problem.element_count(); ++e)
            os << e / problem.nx << "," << e % problem.nx << "," << out.stitch.ids[static_cast<std::size_t>(e)] << "\n";
    }
    run.output("labeling.csv");
    {
        auto os = open_out(run.file("boundaries.csv"));
        os << "a,b,orientation,theta_g,theta_m,load_path\n";
        for (const auto& b : out.boundaries)
            os << b.a << "," << b.b << "," << orientation_name(b.orientation) << "," << real(b.geometric) << ","
               << real(b.mechanical) << "," << (b.load_path ? 1 : 0) << "\n";
    }
    run.output("boundaries.csv");
    {
        auto os = open_out(run.file("mrf.csv"));
        os << "iteration,dual,primal\n";
        for (std::size_t i = 0; i < out.labeling.dual_history.size(); ++i)
            os << i + 1 << "," << real(out.labeling.dual_history[i]) << ","
               << real(i < out.labeling.primal_history.size() ? out.labeling.primal_history[i] : out.labeling.primal)
               << "\n";
    }
    run.output("mrf.csv");
    {
        auto os = open_out(run.file("assembled_field.csv"));
        os << "e,C11,C12,C22,C33\n";
        for (std::size_t e = 0; e < out.stitch.properties.size(); ++e)
            os << e << "," << props_csv(out.stitch.properties[e]) << "\n";
    }
    run.output("assembled_field.csv");
    write_pbm(out.stitch.structure, run.file("structure.pbm"));
    run.output("structure.pbm");
    write_text(svg_bitmap(out.stitch.structure, 1), run.file("structure.svg"));
    run.output("structure.svg");
    {
        auto os = open_out(run.file("report.txt"));
        std::size_t load = 0, open = 0;
        for (const auto& b : out.boundaries) {
            load += b.load_path ? 1 : 0;
            open += (b.load_path && b.geometric >= 1.0) ? 1 : 0;
        }
        os << "iterations " << out.labeling.iterations << "\n";
        os << "converged " << (out.labeling.converged ? "true" : "false") << "\n";
        os << "primal " << real(out.labeling.primal) << "\n";
        os << "dual " << real(out.labeling.dual) << "\n";
        os << "gap " << real(out.labeling.primal - out.labeling.dual) << "\n";
        os << "energy " << real(out.stitch.energy) << "\n";
        os << "mean_theta_g " << real(out.stitch.mean_geometric) << "\n";
        os << "mean_theta_m " << real(out.stitch.mean_mechanical) << "\n";
        os << "load_path_boundaries " << load << "\n";
        os << "load_path_boundaries_without_contact " << open << "\n";
        os << "continuous_objective " << real(out.continuous_objective) << "\n";
        os << "continuous_rrmse " << real(out.continuous_rrmse) << "\n";
        os << "assembled_objective " << real(out.stitch.objective) << "\n";
        os << "assembled_rrmse " << real(out.stitch.rrmse) << "\n";
        for (std::size_t e = 0; e < out.graph.admission_used.size(); ++e)
            if (out.graph.admission_used[e] != s.admission_mse)
                os << "relaxed_admission element " << e << " " << real(out.graph.admission_used[e]) << "\n";
    }
    run.output("report.txt");
    return out;
}

EvaluateResult run_evaluate(const Database& db, const LatentModel& model, RunDirectory& run) {
    EvaluateResult out;
    out.rows.resize(db.size());
    parallel_for(db.size(), [&](std::size_t i) {
        const auto& r = db.records()[i];
        const PosteriorParams pp = model.encode(r.cell);
        const Microstructure rec = decode_cell(pp.mean, model);
        std::size_t same = 0;
        for (std::size_t k = 0; k < rec.size(); ++k) same += rec.cells()[k] == r.cell.cells()[k] ? 1 : 0;
        const auto pred = model.predict_properties(pp.mean).to_array();
        const auto label = r.properties.to_array();
        const double denom = std::sqrt(squared_distance(label, {0, 0, 0, 0}));
        out.rows[i] = {r.id, static_cast<double>(same) / static_cast<double>(rec.size()),
                       std::sqrt(squared_distance(pred, label)) / std::max(denom, 1e-300)};
    });
    std::vector<double> a, e;
    for (const auto& row : out.rows) {
        a.push_back(row.pixel_agreement);
        e.push_back(row.property_error);
    }
    out.median_pixel_agreement = median_of(a);
    out.median_property_error = median_of(e);
    {
        auto os = open_out(run.file("evaluation.csv"));
        os << "id,pixel_agreement,property_error\n";
        for (const auto& row : out.rows) os << row.id << "," << real(row.pixel_agreement) << "," << real(row.property_error) << "\n";
    }
    run.output("evaluation.csv");
    {
        auto os = open_out(run.file("summary.txt"));
        os << "records " << out.rows.size() << "\n";
        os << "median_pixel_agreement " << real(out.median_pixel_agreement) << "\n";
        os << "median_property_error " << real(out.median_property_error) << "\n";
    }
    run.output("summary.txt");
    return out;
}

void run_render(const Database& db, const std::vector<std::int64_t>& ids, RunDirectory& run) {
    std::vector<std::int64_t> chosen = ids;
    if (chosen.empty())
        for (std::size_t i = 0; i < std::min<std::size_t>(64, db.size()); ++i) chosen.push_back(db.records()[i].id);
    std::vector<Microstructure> cells;
    std::vector<std::string> captions;
    for (auto id : chosen) {
        const auto& r = db.at_id(id);
        const std::string name = "cell_" + std::to_string(id) + ".pbm";
        write_pbm(r.cell, run.file(name));
        run.output(name);
        cells.push_back(r.cell);
        captions.push_back("#" + std::to_string(id));
    }
    write_text(svg_filmstrip(cells, captions), run.file("cells.svg"));
    run.output("cells.svg");
}

}  // namespace metadesign
