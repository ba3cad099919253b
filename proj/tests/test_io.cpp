#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "rotset/io.hpp"
#include "test_support.hpp"

using namespace rotset;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("rotset_io_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

RotationApprox small_approx() {
  RotationApprox a;
  a.map_label = "fab:1:1";
  a.k = 4;
  a.n = 3;
  a.m = 5;
  a.reach = 0.125;
  a.eta = 0.07;
  a.lipschitz = 9.5;
  a.sound = true;
  a.boxes = BoxSet(4, -1, -1, 3, 3);
  for (BoxIndex b : {BoxIndex{-2, -1}, BoxIndex{0, 0}, BoxIndex{5, 7},
                     BoxIndex{-4, 6}, BoxIndex{3, -4}})
    a.boxes.insert(b.i, b.j);
  return a;
}

}  // namespace

TEST_CASE("box CSV round trip") {
  TempDir dir;
  const RotationApprox a = small_approx();
  const std::string path = dir.file("q.boxes.csv");
  write_box_csv(path, a);
  const RotationApprox b = parse_box_csv(path);
  CHECK(b.k == a.k);
  CHECK(b.n == a.n);
  CHECK(b.m == a.m);
  CHECK(b.reach == a.reach);
  CHECK(b.map_label == a.map_label);
  CHECK(b.sound == a.sound);
  CHECK(b.boxes.sorted_indices() == a.boxes.sorted_indices());

  // byte-identical rewrite
  const std::string path2 = dir.file("q2.boxes.csv");
  write_box_csv(path2, b);
  std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
  const std::string s1((std::istreambuf_iterator<char>(f1)), {});
  const std::string s2((std::istreambuf_iterator<char>(f2)), {});
  CHECK(s1 == s2);

  // labels may contain commas and parentheses
  RotationApprox c = small_approx();
  c.map_label = "fab(1,1)";
  const std::string path3 = dir.file("q3.boxes.csv");
  write_box_csv(path3, c);
  CHECK(parse_box_csv(path3).map_label == "fab(1,1)");
}

TEST_CASE("box CSV parse errors carry line numbers") {
  TempDir dir;
  const std::string path = dir.file("bad.csv");
  {
    std::ofstream out(path);
    out << "# k=4, n=3, R=0.1, m=5, map=id\n1,2\nbroken line\n";
  }
  try {
    parse_box_csv(path);
    FAIL("expected parse error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find(":3") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_box_csv(dir.file("missing.csv")), IoError);
}

TEST_CASE("polygon CSV round trip") {
  TempDir dir;
  Polygon p;
  p.vertices = {{0.0, 0.0}, {1.5, 0.25}, {1.0, 2.0}, {-0.5, 1.0}};
  const std::string path = dir.file("hull.csv");
  write_polygon_csv(path, p);
  const Polygon q = parse_polygon_csv(path);
  REQUIRE(q.vertices.size() == p.vertices.size());
  for (std::size_t i = 0; i < p.vertices.size(); ++i)
    CHECK(q.vertices[i] == p.vertices[i]);
  CHECK_FALSE(q.degenerate);

  Polygon seg;
  seg.vertices = {{0, 0}, {1, 1}};
  seg.degenerate = true;
  write_polygon_csv(dir.file("seg.csv"), seg);
  CHECK(parse_polygon_csv(dir.file("seg.csv")).degenerate);
}

TEST_CASE("PGM raster bytes") {
  TempDir dir;
  RotationApprox a;
  a.map_label = "id";
  a.k = 1;
  a.n = 1;
  a.boxes = BoxSet(1, 0, 0, 2, 2);
  a.boxes.insert(0, 0);
  a.boxes.insert(1, 1);
  const std::string path = dir.file("q.pgm");
  write_pgm(path, a);

  std::ifstream in(path, std::ios::binary);
  std::string content((std::istreambuf_iterator<char>(in)), {});
  REQUIRE(content.rfind("P5\n", 0) == 0);
  const auto header_end = content.find("255\n");
  REQUIRE(header_end != std::string::npos);
  const std::string pixels = content.substr(header_end + 4);
  REQUIRE(pixels.size() == 4);
  // top row first: (0,1) empty, (1,1) occupied
  CHECK(static_cast<unsigned char>(pixels[0]) == 255);
  CHECK(static_cast<unsigned char>(pixels[1]) == 0);
  CHECK(static_cast<unsigned char>(pixels[2]) == 0);
  CHECK(static_cast<unsigned char>(pixels[3]) == 255);
  CHECK(content.find("pixel (col,row)") != std::string::npos);
}

TEST_CASE("table cache round trip") {
  TempDir dir;
  const MapSpec g = high_period_map();
  const TransitionTable built =
      build_table(g, 5, default_test_grid_size(lipschitz_bound(g)),
                  std::numbers::sqrt2 / 5);
  const std::string path = dir.file("table.bin");
  save_table(path, built);
  const TransitionTable loaded = load_table(path, g);
  CHECK(loaded.k == built.k);
  CHECK(loaded.m == built.m);
  CHECK(loaded.reach == built.reach);
  CHECK(loaded.map_label == built.map_label);
  CHECK(loaded.sound == built.sound);
  CHECK(loaded.eta == built.eta);
  CHECK(loaded.outgoing == built.outgoing);
  CHECK(loaded.shift_s_min == built.shift_s_min);
  CHECK(loaded.shift_t_max == built.shift_t_max);

  // corrupt magic is rejected
  {
    std::ofstream out(dir.file("junk.bin"), std::ios::binary);
    out << "NOPE";
  }
  CHECK_THROWS_AS(load_table(dir.file("junk.bin"), g), IoError);
}

TEST_CASE("failed writes leave no partial files") {
  const std::string path = "/nonexistent_dir_rotset/q.boxes.csv";
  CHECK_THROWS_AS(write_box_csv(path, small_approx()), IoError);
  CHECK_FALSE(std::filesystem::exists(path));
  CHECK_FALSE(std::filesystem::exists(path + ".tmp"));
}

TEST_CASE("vectors CSV") {
  TempDir dir;
  const std::string path = dir.file("v.csv");
  write_vectors_csv(path, {{1.0, 1.0}, {-0.25, 0.5}}, "test header");
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "# test header");
  std::getline(in, line);
  CHECK(line == "1,1");
  std::getline(in, line);
  CHECK(line == "-0.25,0.5");
}
