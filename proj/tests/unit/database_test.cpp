#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "metadesign/bitmap_codec.hpp"
#include "metadesign/database.hpp"
#include "metadesign/error.hpp"
#include "metadesign/seeds.hpp"

using namespace metadesign;

namespace {

std::filesystem::path temp(const std::string& name) { return std::filesystem::temp_directory_path() / name; }

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::filesystem::path& p, const std::string& s) {
    std::ofstream out(p, std::ios::binary);
    out << s;
}

Database sample() {
    Database db(DatabaseHeader{1, 20, 20, 2, {}});
    for (int a = 1; a <= 3; ++a) db.add(grid_lattice(20, 20, a, a + 1), {0.1 * a, 1.0 / 3.0, 0.2 * a, 1e-17 * a});
    db.records()[1].latent = std::vector<double>{0.1, -2.5e-300};
    return db;
}

}  // namespace

TEST_CASE("save and load are lossless") {
    const auto db = sample();
    const auto path = temp("metadesign_db_roundtrip.txt");
    save_database(db, path);
    const auto back = load_database(path);
    REQUIRE(back.size() == db.size());
    for (std::size_t i = 0; i < db.size(); ++i) {
        const auto &a = db.records()[i], &b = back.records()[i];
        CHECK(a.id == b.id);
        CHECK(bitmap_hash(a.cell) == bitmap_hash(b.cell));
        CHECK(a.properties == b.properties);
        CHECK(a.latent == b.latent);
    }
    CHECK(back.content_hash() == db.content_hash());
    save_database(back, temp("metadesign_db_roundtrip2.txt"));
    CHECK(slurp(path) == slurp(temp("metadesign_db_roundtrip2.txt")));
    std::filesystem::remove(path);
    std::filesystem::remove(temp("metadesign_db_roundtrip2.txt"));
}

TEST_CASE("empty database is a header-only file") {
    const auto path = temp("metadesign_db_empty.txt");
    save_database(Database{}, path);
    const auto text = slurp(path);
    CHECK(text.rfind("#metadb v1 50 50 16 ", 0) == 0);
    CHECK(load_database(path).empty());
    std::filesystem::remove(path);
}

TEST_CASE("corruption is detected") {
    const auto path = temp("metadesign_db_bad.txt");
    save_database(sample(), path);
    const std::string good = slurp(path);

    std::string flipped = good;
    // Change the last digit of the first record line; it still parses.
    const auto first_end = flipped.find('\n', flipped.find('\n') + 1);
    const auto pos = flipped.find_last_of("0123456789", first_end);
    flipped[pos] = flipped[pos] == '1' ? '2' : '1';
    spit(path, flipped);
    CHECK_THROWS_AS(load_database(path), ChecksumFailure);

    std::string version = good;
    version.replace(version.find("v1"), 2, "v9");
    spit(path, version);
    CHECK_THROWS_AS(load_database(path), VersionMismatch);

    // Cut inside the second record line.
    const auto second = good.find('\n', good.find('\n') + 1);
    spit(path, good.substr(0, second + 12));
    try {
        load_database(path);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(e.line() >= 3);
        CHECK(std::string(e.what()).find("line") != std::string::npos);
    }
    std::filesystem::remove(path);
}

TEST_CASE("ids and hashes") {
    auto db = sample();
    CHECK_THROWS_AS(db.add(Microstructure(20, 20, 1), {}, 1), DomainError);
    CHECK_THROWS_AS(db.add(Microstructure(10, 10, 1), {}), DimensionError);
    const auto id = db.add(Microstructure(20, 20, 1), {});
    CHECK(id == 3);
    CHECK(db.at_id(id).cell.id == id);
    CHECK(db.contains_hash(bitmap_hash(Microstructure(20, 20, 1))));
    CHECK_FALSE(db.fully_annotated());
}
