#include <doctest.h>

#include "metadesign/config.hpp"
#include "metadesign/error.hpp"
#include "metadesign/problem.hpp"

using namespace metadesign;

TEST_CASE("minimal config uses defaults") {
    const auto c = parse_config("[run]\nrng_seed = 42\n");
    CHECK(c.rng_seed == 42);
    CHECK(c.training.rng_seed == 42);
    CHECK(c.training.epochs == 100);
    CHECK(c.family.delta == doctest::Approx(0.05));
    CHECK(c.assembly.candidates == 10);
}

TEST_CASE("values are parsed per section") {
    const auto c = parse_config(
        "# desk run\n[run]\nrng_seed = 7  # trailing comment\nthreads = 2\n"
        "[training]\nepochs = 30\noptimizer = adam\nencoder_channels = 4, 8\n"
        "[design]\nmode = family\nbeta_continuation = true\n");
    CHECK(c.threads == 2);
    CHECK(c.training.epochs == 30);
    CHECK(c.training.optimizer == nn::Optimizer::Kind::adam);
    CHECK(c.architecture.encoder_channels == std::vector<int>{4, 8});
    CHECK(c.design.optim.mode == OptimConfig::Mode::family);
    CHECK(c.design.optim.beta_continuation);
}

TEST_CASE("invalid configs are rejected") {
    CHECK_THROWS_AS(parse_config("[training]\nepochs = 3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[run]\nrng_seed = 1\nbogus = 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[nope]\nx = 1\n[run]\nrng_seed = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[run]\nrng_seed = 1\nrng_seed = 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[run]\nrng_seed = x\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[run]\nrng_seed = 1\n[training]\nepochs = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[run]\nrng_seed = 1\n[database]\nheight = 49\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("rng_seed = 1\n"), ConfigError);
    try {
        parse_config("[run]\nrng_seed = 1\n[family]\ndelta = abc\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 4") != std::string::npos);
    }
}

TEST_CASE("formatted config parses back to the same text") {
    auto c = parse_config("[run]\nrng_seed = 99\n[family]\ndelta = 0.123456789012345\n");
    const auto text = format_config(c);
    CHECK(format_config(parse_config(text)) == text);
    CHECK(parse_config(text).family.delta == c.family.delta);
}

TEST_CASE("problem files") {
    const auto def = parse_problem(
        "nx = 2\nny = 1\nmode = family\n"
        "dirichlet = 0 0 0\ndirichlet = 0 1 0\ndirichlet = 3 0 0\ndirichlet = 2 0 -0.1\ndirichlet = 5 0 -0.1\n"
        "interest = 4 1 0.02\nload = 1 1 0.5\n");
    CHECK(def.problem.nx == 2);
    CHECK(def.mode == OptimConfig::Mode::family);
    CHECK(def.problem.dirichlet.size() == 5);
    CHECK(def.problem.interest[0].target == doctest::Approx(0.02));
    CHECK(parse_problem(format_problem(def)).problem.dirichlet.size() == 5);
    CHECK(format_problem(parse_problem(format_problem(def))) == format_problem(def));

    CHECK_THROWS_AS(parse_problem("nx = 2\n"), FormatError);
    try {
        parse_problem("nx = 2\nny = 2\ndirichlet = 0 3 0\n");
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(parse_problem("nx = 1\nny = 1\ndirichlet = 99 0 0\n"), DomainError);
    CHECK(resolve_problem("desk-4x10").problem.element_count() == 40);
    CHECK(resolve_problem("desk-8x12").problem.ny == 8);
}
