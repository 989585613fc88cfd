#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "metadesign/config.hpp"
#include "metadesign/error.hpp"
#include "metadesign/pipeline.hpp"

using namespace metadesign;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("metadesign_pipeline_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("field csv round trip") {
    const auto dir = scratch("field");
    PropertyField f;
    f.values = {{0.5, 0.1, 0.4, 0.2}, {1.0 / 3.0, -0.05, 0.7, 0.125}};
    write_field_csv(f, (dir / "field.csv").string());
    const auto back = read_field_csv(dir / "field.csv");
    REQUIRE(back.size() == 2);
    CHECK(back[0] == f.values[0]);
    CHECK(back[1] == f.values[1]);
    fs::remove_all(dir);
}

TEST_CASE("malformed field csv reports the line") {
    const auto dir = scratch("badfield");
    {
        std::ofstream os(dir / "f.csv");
        os << "e,C11,C12,C22,C33\n0,1,0,1,0.3\n1,1,zero,1,0.3\n";
    }
    try {
        read_field_csv(dir / "f.csv");
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(e.line() == 3);
    }
    {
        std::ofstream os(dir / "g.csv");
        os << "id,a,b\n";
    }
    CHECK_THROWS_AS(read_field_csv(dir / "g.csv"), FormatError);
    fs::remove_all(dir);
}

TEST_CASE("manifest lists inputs, outputs and the resolved config") {
    const auto dir = scratch("manifest");
    RunDirectory run(dir / "stage", "train");
    {
        std::ofstream os(run.file("a.csv"));
        os << "x\n1\n";
    }
    run.output("a.csv");
    run.input("config", run.file("a.csv"));
    run.note("records", "12");
    RunConfig cfg;
    cfg.rng_seed = 17;
    run.write_manifest(cfg);
    const auto text = slurp(run.file("manifest.txt"));
    CHECK(text.find("stage train\n") != std::string::npos);
    CHECK(text.find("seed 17\n") != std::string::npos);
    CHECK(text.find("output a.csv " + file_digest(run.file("a.csv"))) != std::string::npos);
    CHECK(text.find("note records 12\n") != std::string::npos);
    CHECK(text.find("# rng_seed = 17") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("run directories never collide") {
    const auto dir = scratch("runs");
    const auto a = RunDirectory::create(dir, "gen-db");
    const auto b = RunDirectory::create(dir, "gen-db");
    CHECK(a.path() != b.path());
    CHECK(fs::is_directory(a.path()));
    CHECK(fs::is_directory(b.path()));
    fs::remove_all(dir);
}

TEST_CASE("file digest depends on content") {
    const auto dir = scratch("digest");
    std::ofstream(dir / "a") << "abc";
    std::ofstream(dir / "b") << "abd";
    CHECK(file_digest(dir / "a").size() == 16);
    CHECK(file_digest(dir / "a") != file_digest(dir / "b"));
    fs::remove_all(dir);
}

TEST_CASE("curve lookup by name") {
    const auto c = curve_by_name("graded_isotropic", MaterialSpec{}, 0.07);
    CHECK(c.delta() == 0.07);
    CHECK_THROWS_AS(curve_by_name("linear", MaterialSpec{}, 0.05), ConfigError);
}

TEST_CASE("transpose closure is a database key") {
    const auto cfg = parse_config("[run]\nrng_seed = 1\n[database]\ntranspose_closure = true\n");
    CHECK(cfg.database.transpose_closure);
    CHECK(parse_config(format_config(cfg)).database.transpose_closure);
}
