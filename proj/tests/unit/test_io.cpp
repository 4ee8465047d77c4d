#include <doctest.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "crt/error.hpp"
#include "crt/io.hpp"
#include "crt/phantoms.hpp"
#include "helpers.hpp"

using namespace crt;
using crt::test::box_grid;

namespace {

ScalarField example_field() {
    const GridSpec grid(2, {5, 4, 6}, {0.1, 0.2, 0.05}, {-0.2, 0.3, -1.0});
    return sample(grid, [](auto p) { return std::sin(3.0 * p[0]) * p[1] + std::exp(p[2]) / 3.0; });
}

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("crt_unit_" + name);
}

}  // namespace

TEST_CASE("CRTF round trip is bit exact") {
    const auto f = example_field();
    const auto bytes = encode_crtf(f);
    CHECK(bytes.size() == 4 + 4 + 4 + 3 * 24 + 8 * f.grid().size());
    CHECK(bytes.substr(0, 4) == "CRTF");
    const auto back = decode_crtf(bytes);
    CHECK(back.grid() == f.grid());
    CHECK(std::memcmp(back.values().data(), f.values().data(), 8 * f.grid().size()) == 0);

    const auto path = temp_path("roundtrip.crtf");
    write_crtf(path.string(), f);
    const auto from_disk = read_crtf(path.string());
    CHECK(encode_crtf(from_disk) == bytes);
    std::filesystem::remove(path);
}

TEST_CASE("CRTF header is little-endian") {
    const auto bytes = encode_crtf(example_field());
    CHECK(static_cast<unsigned char>(bytes[4]) == 1);
    CHECK(bytes[5] == 0);
    CHECK(static_cast<unsigned char>(bytes[8]) == 2);
    CHECK(static_cast<unsigned char>(bytes[12]) == 5);
}

TEST_CASE("CRTF decoding errors name the offset") {
    auto bytes = encode_crtf(example_field());
    SUBCASE("wrong magic") {
        bytes[1] = 'X';
        CHECK_THROWS_WITH_AS(decode_crtf(bytes), doctest::Contains("offset 0"), FormatError);
    }
    SUBCASE("wrong version") {
        bytes[4] = 9;
        CHECK_THROWS_WITH_AS(decode_crtf(bytes), doctest::Contains("offset 4"), FormatError);
    }
    SUBCASE("bad dimension") {
        bytes[8] = 7;
        CHECK_THROWS_WITH_AS(decode_crtf(bytes), doctest::Contains("offset 8"), FormatError);
    }
    SUBCASE("truncated header") {
        CHECK_THROWS_WITH_AS(decode_crtf(bytes.substr(0, 30)), doctest::Contains("truncated"), FormatError);
    }
    SUBCASE("short payload") {
        CHECK_THROWS_WITH_AS(decode_crtf(bytes.substr(0, bytes.size() - 8)), doctest::Contains("offset 84"),
                             FormatError);
    }
    SUBCASE("invalid axis") {
        bytes[12] = 2;  // three samples on the first axis
        CHECK_THROWS_AS(decode_crtf(bytes), FormatError);
    }
    SUBCASE("non-finite value") {
        const double nan = std::nan("");
        std::memcpy(bytes.data() + 84 + 16, &nan, 8);
        CHECK_THROWS_WITH_AS(decode_crtf(bytes), doctest::Contains("offset 100"), FormatError);
    }
    SUBCASE("empty input") { CHECK_THROWS_AS(decode_crtf(""), FormatError); }
    SUBCASE("missing file") { CHECK_THROWS_AS(read_crtf("/nonexistent/crt/file.crtf"), FormatError); }
}

TEST_CASE("CSV export") {
    const auto grid = box_grid(1, 4, 1.0, 4, 0.0, 1.0);
    const auto f = sample(grid, [](auto p) { return p[0] + 10.0 * p[1]; });
    std::ostringstream out;
    write_csv(out, f);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "x1,t,value");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 16);
    CHECK(out.str().find("\n-1,0,-1\n") != std::string::npos);
}

TEST_CASE("PGM export") {
    const auto grid = box_grid(2, 5, 1.0, 4, 0.0, 1.0);
    const auto f = sample(grid, [](auto p) { return p[0] + 2.0 * p[1] + p[2]; });
    const auto path = temp_path("slice.pgm");
    write_pgm(path.string(), f, {0, 1, {0, 0, 2}});

    std::ifstream in(path, std::ios::binary);
    std::string magic;
    int cols = 0;
    int rows = 0;
    int maxval = 0;
    in >> magic >> cols >> rows >> maxval;
    in.get();
    CHECK(magic == "P5");
    CHECK(cols == 5);
    CHECK(rows == 5);
    CHECK(maxval == 65535);
    unsigned char px[6];
    in.read(reinterpret_cast<char*>(px), 6);
    CHECK((px[0] << 8 | px[1]) == 0);
    // the middle column sits a third of the way up: 2 out of a span of 6
    CHECK((px[4] << 8 | px[5]) == 21845);

    const auto meta = read_kv_file(path.string() + ".txt");
    CHECK(meta.at("row_axis") == "0");
    CHECK(meta.at("col_axis") == "1");
    CHECK(meta.at("fixed_axis_2") == "2");
    CHECK(std::stod(meta.at("min")) == doctest::Approx(-3.0 + 2.0 / 3.0));
    CHECK(std::stod(meta.at("max")) == doctest::Approx(3.0 + 2.0 / 3.0));
    std::filesystem::remove(path);
    std::filesystem::remove(path.string() + ".txt");

    CHECK_THROWS_AS(write_pgm(path.string(), f, {0, 0, {0, 0, 0}}), DomainError);
    CHECK_THROWS_AS(write_pgm(path.string(), f, {0, 1, {0, 0, 9}}), DomainError);
}

TEST_CASE("key=value config parsing") {
    std::istringstream in("# comment\nm = 2\n\nphi=0.785 # trailing\n  name =  a b \n");
    const auto kv = parse_kv(in);
    CHECK(kv.size() == 3);
    CHECK(kv.at("m") == "2");
    CHECK(kv.at("phi") == "0.785");
    CHECK(kv.at("name") == "a b");

    std::istringstream bad("m=1\njunk\n");
    CHECK_THROWS_WITH_AS(parse_kv(bad), "config line 2: expected key=value", FormatError);
}
