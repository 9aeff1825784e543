#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "wtomo/io.hpp"
#include "wtomo/phantoms.hpp"

using namespace wtomo;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("wtomo-test-" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const {
        return (path / name).string();
    }
};

std::vector<uint8_t> read_pgm_pixels(const std::string& path, int& nx,
                                     int& ny) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::string magic;
    int maxval = 0;
    in >> magic >> nx >> ny >> maxval;
    REQUIRE(magic == "P5");
    REQUIRE(maxval == 255);
    in.get();  // single whitespace after the header
    std::vector<uint8_t> pixels(static_cast<size_t>(nx) * ny);
    in.read(reinterpret_cast<char*>(pixels.data()),
            static_cast<std::streamsize>(pixels.size()));
    REQUIRE(in.gcount() == static_cast<std::streamsize>(pixels.size()));
    return pixels;
}

}  // namespace

TEST_CASE("PGM export: constant 0.5 maps to 128 (round half up)") {
    TempDir td;
    const ImageGrid img(4, 4, 0.5);
    const std::string path = td.file("half.pgm");
    export_image(img, 0.0, 1.0, path);
    int nx = 0, ny = 0;
    const auto px = read_pgm_pixels(path, nx, ny);
    CHECK(nx == 4);
    CHECK(ny == 4);
    for (uint8_t v : px) CHECK(static_cast<int>(v) == 128);  // 0.5*255 = 127.5
}

TEST_CASE("PGM export clamps out-of-window values") {
    TempDir td;
    ImageGrid img(2, 1);
    img.values = {-3.0, 7.0};
    const std::string path = td.file("clamp.pgm");
    export_image(img, 0.0, 1.0, path);
    int nx = 0, ny = 0;
    const auto px = read_pgm_pixels(path, nx, ny);
    CHECK(static_cast<int>(px[0]) == 0);
    CHECK(static_cast<int>(px[1]) == 255);
}

TEST_CASE("PGM export of the binary wedge is a binary 0/255 image") {
    TempDir td;
    const ImageGrid w = make_two_wedge(32, 32);
    const std::string path = td.file("wedge.pgm");
    export_image(w, 0.0, 1.0, path);
    int nx = 0, ny = 0;
    const auto px = read_pgm_pixels(path, nx, ny);
    for (size_t i = 0; i < px.size(); ++i) {
        const int expect = w.values[i] == 1.0 ? 255 : 0;
        CHECK(static_cast<int>(px[i]) == expect);
    }
}

TEST_CASE("PGM export rejects an empty window") {
    TempDir td;
    CHECK_THROWS(export_image(ImageGrid(2, 2), 1.0, 1.0, td.file("bad.pgm")));
}

TEST_CASE("raw float32 round-trip") {
    TempDir td;
    std::mt19937 rng(47);
    std::uniform_real_distribution<double> dist(-10.0, 10.0);
    ImageGrid img(7, 5);
    for (double& v : img.values) v = dist(rng);
    const std::string path = td.file("img.raw");
    write_raw(img, path);
    const ImageGrid back = read_raw(path);
    REQUIRE(back.nx == 7);
    REQUIRE(back.ny == 5);
    for (size_t i = 0; i < img.size(); ++i)
        CHECK(back.values[i] ==
              doctest::Approx(img.values[i]).epsilon(1e-6));  // float32
}

TEST_CASE("raw header layout: 16 bytes, WTR1 magic, nx, ny") {
    TempDir td;
    const std::string path = td.file("hdr.raw");
    write_raw(ImageGrid(3, 2, 1.0), path);
    CHECK(fs::file_size(path) == 16 + 6 * sizeof(float));
    std::ifstream in(path, std::ios::binary);
    char magic[4];
    uint32_t nx = 0, ny = 0, reserved = 1;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&nx), 4);
    in.read(reinterpret_cast<char*>(&ny), 4);
    in.read(reinterpret_cast<char*>(&reserved), 4);
    CHECK(std::string(magic, 4) == "WTR1");
    CHECK(nx == 3);
    CHECK(ny == 2);
    CHECK(reserved == 0);
}

TEST_CASE("read_raw rejects a bad magic") {
    TempDir td;
    const std::string path = td.file("bad.raw");
    std::ofstream(path, std::ios::binary) << "NOPE\0\0\0\0\0\0\0\0\0\0\0\0";
    CHECK_THROWS(read_raw(path));
}

TEST_CASE("write_csv emits a header and one row per entry") {
    TempDir td;
    const std::string path = td.file("t.csv");
    write_csv(path, {"a", "b"}, {{1.0, 2.0}, {3.0, 4.0}});
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "a,b");
    std::getline(in, line);
    CHECK(line.substr(0, 1) == "1");
    std::getline(in, line);
    CHECK(line.substr(0, 1) == "2");
    CHECK_FALSE(std::getline(in, line));
}

TEST_CASE("write_csv rejects ragged columns") {
    TempDir td;
    CHECK_THROWS(write_csv(td.file("r.csv"), {"a", "b"}, {{1.0}, {1.0, 2.0}}));
}

TEST_CASE("line profile samples the main diagonal") {
    ImageGrid img(3, 3);
    for (int iy = 0; iy < 3; ++iy)
        for (int ix = 0; ix < 3; ++ix) img.at(ix, iy) = 10.0 * iy + ix;
    const auto prof = line_profile(img);
    REQUIRE(prof.size() == 3);
    CHECK(prof[0] == doctest::Approx(0.0));
    CHECK(prof[1] == doctest::Approx(11.0));
    CHECK(prof[2] == doctest::Approx(22.0));
}

TEST_CASE("line profile rejects non-square images") {
    CHECK_THROWS(line_profile(ImageGrid(3, 4)));
}

TEST_CASE("line profile of the wedge has a plateau at 1 and zeros") {
    const ImageGrid w = make_two_wedge(64, 64);
    const auto prof = line_profile(w);
    REQUIRE(prof.size() == 64);
    int ones = 0, zeros = 0;
    for (double v : prof) {
        if (v == 1.0) ++ones;
        if (v == 0.0) ++zeros;
    }
    CHECK(ones > 16);  // long plateau across the wedge interiors
    CHECK(zeros > 4);  // border
}

TEST_CASE("export_line_profile writes index,value rows") {
    TempDir td;
    ImageGrid img(2, 2);
    img.at(0, 0) = 0.25;
    img.at(1, 1) = 0.75;
    const std::string path = td.file("prof.csv");
    export_line_profile(img, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "index,value");
    std::getline(in, line);
    CHECK(line.substr(0, 2) == "0,");
    CHECK(line.find("0.25") != std::string::npos);
    std::getline(in, line);
    CHECK(line.substr(0, 2) == "1,");
    CHECK(line.find("0.75") != std::string::npos);
}
