#include "metadesign/problem.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
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

int parse_int(const std::string& v, std::size_t line) {
    std::istringstream is(v);
    int x = 0;
    if (!(is >> x) || !(is >> std::ws).eof()) throw FormatError("expected an integer, got '" + v + "'", line);
    return x;
}

struct Triple {
    int node;
    int axis;
    double value;
};

Triple parse_triple(const std::string& v, std::size_t line) {
    std::istringstream is(v);
    is.imbue(std::locale::classic());
    Triple t{};
    if (!(is >> t.node >> t.axis >> t.value) || !(is >> std::ws).eof() || !std::isfinite(t.value))
        throw FormatError("expected '<node> <axis> <value>', got '" + v + "'", line);
    if (t.axis != 0 && t.axis != 1) throw FormatError("axis must be 0 or 1", line);
    return t;
}

}  // namespace

ProblemDefinition parse_problem(const std::string& text) {
    ProblemDefinition def;
    bool have_nx = false, have_ny = false;
    std::istringstream in(text);
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw FormatError("expected 'key = value'", line);
        const std::string key = trim(s.substr(0, eq)), value = trim(s.substr(eq + 1));
        if (key == "nx") {
            def.problem.nx = parse_int(value, line);
            have_nx = true;
        } else if (key == "ny") {
            def.problem.ny = parse_int(value, line);
            have_ny = true;
        } else if (key == "mode") {
            if (value == "database") def.mode = OptimConfig::Mode::database;
            else if (value == "family") def.mode = OptimConfig::Mode::family;
            else throw FormatError("mode must be database or family", line);
        } else if (key == "curve") {
            def.curve = value;
        } else if (key == "dirichlet") {
            const auto t = parse_triple(value, line);
            def.problem.dirichlet.push_back({t.node, t.axis, t.value});
        } else if (key == "load") {
            const auto t = parse_triple(value, line);
            def.problem.loads.push_back({t.node, t.axis, t.value});
        } else if (key == "interest") {
            const auto t = parse_triple(value, line);
            def.problem.interest.push_back({t.node, t.axis, t.value});
        } else {
            throw FormatError("unknown key '" + key + "'", line);
        }
    }
    if (!have_nx || !have_ny) throw FormatError("problem file must set nx and ny");
    if (def.problem.nx < 1 || def.problem.ny < 1) throw FormatError("nx and ny must be positive");
    def.problem.validate();
    return def;
}

ProblemDefinition load_problem(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open problem file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_problem(ss.str());
}

std::string format_problem(const ProblemDefinition& def) {
    std::string out;
    char buf[96];
    out += "nx = " + std::to_string(def.problem.nx) + "\n";
    out += "ny = " + std::to_string(def.problem.ny) + "\n";
    out += std::string("mode = ") + (def.mode == OptimConfig::Mode::family ? "family" : "database") + "\n";
    out += "curve = " + def.curve + "\n";
    for (const auto& d : def.problem.dirichlet) {
        std::snprintf(buf, sizeof buf, "dirichlet = %d %d %.17g\n", d.node, d.axis, d.value);
        out += buf;
    }
    for (const auto& l : def.problem.loads) {
        std::snprintf(buf, sizeof buf, "load = %d %d %.17g\n", l.node, l.axis, l.value);
        out += buf;
    }
    for (const auto& t : def.problem.interest) {
        std::snprintf(buf, sizeof buf, "interest = %d %d %.17g\n", t.node, t.axis, t.target);
        out += buf;
    }
    return out;
}

void save_problem(const ProblemDefinition& def, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write problem file " + path.string());
    out << format_problem(def);
}

MacroProblem bridge_problem(int nx, int ny, double compression, double amplitude) {
    if (nx < 2 || ny < 1) throw DomainError("bridge problem needs nx >= 2 and ny >= 1");
    MacroProblem p;
    p.nx = nx;
    p.ny = ny;
    for (int iy = 0; iy <= ny; ++iy) {
        p.dirichlet.push_back({p.node_id(0, iy), 0, 0.0});
        p.dirichlet.push_back({p.node_id(nx, iy), 0, -compression});
    }
    p.dirichlet.push_back({p.node_id(0, 0), 1, 0.0});
    for (int ix = 1; ix < nx; ++ix) {
        const double x = static_cast<double>(ix) / nx;
        p.interest.push_back({p.node_id(ix, ny), 1, amplitude * std::sin(std::numbers::pi * x)});
    }
    p.validate();
    return p;
}

ProblemDefinition resolve_problem(const std::string& name_or_path) {
    ProblemDefinition def;
    if (name_or_path == "desk-4x10") {
        def.problem = bridge_problem(10, 4);
    } else if (name_or_path == "desk-8x12") {
        def.problem = bridge_problem(12, 8);
    } else {
        def = load_problem(name_or_path);
    }
    return def;
}

}  // namespace metadesign
