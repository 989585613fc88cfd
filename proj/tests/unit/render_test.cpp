#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "metadesign/error.hpp"
#include "metadesign/render.hpp"

using namespace metadesign;

TEST_CASE("plain bitmap layout") {
    Microstructure m(2, 3);
    m(0, 1) = 1;
    m(1, 2) = 1;
    const auto path = std::filesystem::temp_directory_path() / "metadesign_render.pbm";
    write_pbm(m, path);
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str() == "P1\n3 2\n010\n001\n");
    std::filesystem::remove(path);
}

TEST_CASE("svg outputs are well formed") {
    const auto heat = svg_heatmap(3, 2, {0, 1, 2, 3, 4, 5}, "C11");
    CHECK(heat.rfind("<svg", 0) == 0);
    CHECK(heat.find("</svg>") != std::string::npos);
    CHECK(heat.find(colormap(1.0)) != std::string::npos);
    CHECK_THROWS(svg_heatmap(3, 2, {1, 2}, "bad"));
    const auto sc = svg_scatter({0, 1}, {1, 0}, {}, "a<b", "x", "y");
    CHECK(sc.find("a&lt;b") != std::string::npos);
    Microstructure m(4, 4, 1);
    CHECK(svg_filmstrip({m, m}, {"0", "1"}).find("<text") != std::string::npos);
    CHECK(colormap(0.0) == "#440154");
}
