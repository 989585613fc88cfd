#include <doctest.h>

#include "metadesign/error.hpp"
#include "metadesign/bitmap_codec.hpp"
#include "metadesign/microstructure.hpp"
#include "metadesign/seeds.hpp"

using namespace metadesign;

namespace {

Microstructure from_rows(const std::vector<std::string>& rows) {
    Microstructure m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (int r = 0; r < m.height(); ++r)
        for (int c = 0; c < m.width(); ++c) m(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] == '1';
    return m;
}

}  // namespace

TEST_CASE("threshold is strict") {
    DensityField f{1, 3, {0.5, 0.9, 0.95}};
    const auto m = threshold(f, 0.9);
    CHECK(m(0, 0) == 0);
    CHECK(m(0, 1) == 0);
    CHECK(m(0, 2) == 1);
    CHECK_THROWS_AS(threshold(f, 1.0), DomainError);
}

TEST_CASE("symmetrization copies the top-left quadrant") {
    const auto m = from_rows({"1000", "0100", "0000", "0000"});
    const auto s = enforce_orthotropic_symmetry(m);
    CHECK(is_orthotropic_symmetric(s));
    CHECK(s == from_rows({"1001", "0110", "0110", "1001"}));
    CHECK(enforce_orthotropic_symmetry(s) == s);
    CHECK_THROWS_AS(enforce_orthotropic_symmetry(Microstructure(3, 4)), DimensionError);
}

TEST_CASE("defect repair removes isolated pixels and fills checkerboards") {
    const auto iso = from_rows({"0000", "0100", "0000", "0000"});
    CHECK(count_isolated_pixels(iso) == 1);
    CHECK(repair_defects(iso).solid_count() == 0);

    const auto cb = from_rows({"1100", "1010", "0111", "0011"});
    CHECK(count_checkerboards(cb) > 0);
    const auto fixed = repair_defects(cb);
    CHECK(count_checkerboards(fixed) == 0);
    CHECK(count_isolated_pixels(fixed) == 0);
    CHECK(repair_defects(fixed) == fixed);
}

TEST_CASE("defect repair commutes with reflections") {
    const auto m = from_rows({"100101", "011010", "000100", "110011", "010000", "101101"});
    CHECK(repair_defects(m.mirrored_horizontal()) == repair_defects(m).mirrored_horizontal());
    CHECK(repair_defects(m.mirrored_vertical()) == repair_defects(m).mirrored_vertical());
}

TEST_CASE("boundary connectivity") {
    CHECK(is_boundary_connected(Microstructure(4, 4, 1)));
    CHECK_FALSE(is_boundary_connected(Microstructure(4, 4, 0)));
    // Island in the centre touches no edge.
    CHECK_FALSE(is_boundary_connected(from_rows({"0000", "0110", "0110", "0000"})));
    // Two disconnected bars.
    CHECK_FALSE(is_boundary_connected(from_rows({"1111", "0000", "0000", "1111"})));
    CHECK(is_boundary_connected(from_rows({"1111", "1001", "1001", "1111"})));
}

TEST_CASE("boundary strips") {
    const auto m = from_rows({"1100", "0010", "0001", "1000"});
    CHECK(boundary_strip(m, Side::top) == std::vector<std::uint8_t>{1, 1, 0, 0});
    CHECK(boundary_strip(m, Side::bottom) == std::vector<std::uint8_t>{1, 0, 0, 0});
    CHECK(boundary_strip(m, Side::left) == std::vector<std::uint8_t>{1, 0, 0, 1});
    CHECK(boundary_strip(m, Side::right) == std::vector<std::uint8_t>{0, 0, 1, 0});
}

TEST_CASE("seed cells are admissible and distinct") {
    const auto seeds = seed_set(50, 50);
    REQUIRE(seeds.size() >= 4);
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        CHECK(is_admissible(seeds[i]));
        for (std::size_t j = i + 1; j < seeds.size(); ++j) CHECK_FALSE(seeds[i] == seeds[j]);
    }
}

TEST_CASE("perturbation keeps invariants and is seeded") {
    const auto seed = grid_lattice(50, 50, 5, 5);
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto r = perturb(seed, s);
        if (!r.perturbed) {
            CHECK(r.cell == seed);
            continue;
        }
        CHECK(is_admissible(r.cell));
        CHECK(std::abs(r.cell.volume_fraction() - seed.volume_fraction()) <= 0.05 + 1e-12);
        CHECK(r.cell == perturb(seed, s).cell);
    }
}

TEST_CASE("bitmap codec round trip") {
    const auto m = x_brace(50, 50, 3.0, 2);
    const auto text = encode_bitmap(m);
    CHECK(decode_bitmap(text, 50, 50) == m);
    CHECK(bitmap_hash(m) == bitmap_hash(decode_bitmap(text, 50, 50)));
    const auto other = grid_lattice(50, 50, 4, 2);
    CHECK(bitmap_hash(m) != bitmap_hash(other));
    CHECK(base64_encode({'M', 'a', 'n'}) == "TWFu");
    CHECK(base64_decode("TWE=") == std::vector<std::uint8_t>{'M', 'a'});
}
