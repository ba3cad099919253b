#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "rotset/geometry.hpp"
#include "rotset/io.hpp"

using namespace rotset;

namespace {

namespace fs = std::filesystem;

std::string binary() {
  const char* env = std::getenv("ROTSET_BIN");
  REQUIRE(env != nullptr);
  return env;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("rotset_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

int run_cli(const std::string& args, const std::string& out_file = "") {
  std::string cmd = binary() + " " + args + " 2>/dev/null";
  if (!out_file.empty()) cmd += " >" + out_file;
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)), {});
}

}  // namespace

TEST_CASE("compute: translation field produces the expected hull") {
  TempDir dir;
  const std::string prefix = dir.file("tr");
  const int rc = run_cli("compute --map trans:0.5:0 --k 4 --n 10 --out-prefix " +
                         prefix);
  REQUIRE(rc == 0);
  for (const char* suffix :
       {".boxes.csv", ".pgm", ".hull.csv", ".meta", ".log"})
    CHECK(fs::exists(prefix + suffix));

  const Polygon hull = parse_polygon_csv(prefix + ".hull.csv");
  // hull contains the exact translated square and stays within the 2eps
  // inflation allowed by the reach radius
  const double eps = std::numbers::sqrt2 / 4;
  for (const Vec2 corner :
       {Vec2{0.5, 0.0}, Vec2{0.6, 0.0}, Vec2{0.5, 0.1}, Vec2{0.6, 0.1}})
    CHECK(distance_to_polygon(corner, hull) == 0.0);
  const Polygon target = make_rect(0.5, 0.6, 0.0, 0.1);
  for (const Vec2& v : hull.vertices)
    CHECK(distance_to_polygon(v, target) <= 2 * eps);
}

TEST_CASE("compute: reruns are byte-identical") {
  TempDir dir;
  const std::string p1 = dir.file("a"), p2 = dir.file("b");
  REQUIRE(run_cli("compute --map fab:1:1 --k 8 --n 5 --out-prefix " + p1) == 0);
  REQUIRE(run_cli("compute --map fab:1:1 --k 8 --n 5 --out-prefix " + p2) == 0);
  CHECK(slurp(p1 + ".boxes.csv") == slurp(p2 + ".boxes.csv"));
  CHECK(slurp(p1 + ".hull.csv") == slurp(p2 + ".hull.csv"));
  CHECK(slurp(p1 + ".pgm") == slurp(p2 + ".pgm"));
  CHECK(slurp(p1 + ".meta") == slurp(p2 + ".meta"));

  // data outputs do not depend on the worker count (metadata records it)
  const std::string p3 = dir.file("c");
  REQUIRE(run_cli("compute --map fab:1:1 --k 8 --n 5 --threads 3 "
                  "--out-prefix " + p3) == 0);
  CHECK(slurp(p1 + ".boxes.csv") == slurp(p3 + ".boxes.csv"));
  CHECK(slurp(p1 + ".hull.csv") == slurp(p3 + ".hull.csv"));
}

TEST_CASE("compute: hull of fab:1:1 stays in the coarse sanity window") {
  TempDir dir;
  const std::string prefix = dir.file("f");
  REQUIRE(run_cli("compute --map fab:1:1 --k 8 --n 25 --out-prefix " + prefix) ==
          0);
  const Polygon hull = parse_polygon_csv(prefix + ".hull.csv");
  for (const Vec2& v : hull.vertices) {
    CHECK(std::abs(v.x) <= 4.0);
    CHECK(std::abs(v.y) <= 4.0);
  }
}

TEST_CASE("compute: table cache round trips") {
  TempDir dir;
  const std::string prefix1 = dir.file("c1"), prefix2 = dir.file("c2");
  const std::string cache = dir.file("table.bin");
  REQUIRE(run_cli("compute --map g --k 6 --n 3 --table-cache " + cache +
                  " --out-prefix " + prefix1) == 0);
  REQUIRE(fs::exists(cache));
  REQUIRE(run_cli("compute --map g --k 6 --n 3 --table-cache " + cache +
                  " --out-prefix " + prefix2) == 0);
  CHECK(slurp(prefix1 + ".boxes.csv") == slurp(prefix2 + ".boxes.csv"));
  const std::string meta = slurp(prefix2 + ".meta");
  CHECK(meta.find("table_cache=hit") != std::string::npos);

  // a key mismatch (different m) falls back to a rebuild
  const std::string prefix3 = dir.file("c3");
  REQUIRE(run_cli("compute --map g --k 6 --n 3 --m 120 --table-cache " +
                  cache + " --out-prefix " + prefix3) == 0);
  CHECK(slurp(prefix3 + ".meta").find("table_cache=rebuilt") !=
        std::string::npos);
}

TEST_CASE("exit codes") {
  TempDir dir;
  CHECK(run_cli("compute --map nonsense:1 --k 4 --n 1 --out-prefix " +
                dir.file("x")) == 2);
  CHECK(run_cli("compute --k 4 --n 1") == 2);  // missing --map
  CHECK(run_cli("compute --map fab:1:1 --k 8 --n 1 --m 5 --strict "
                "--out-prefix " +
                dir.file("y")) == 4);
  CHECK(run_cli("compute --map fab:1:1 --k 4 --n 1 --out-prefix "
                "/nonexistent_dir_rotset/out") == 3);
  CHECK(run_cli("hausdorff " + dir.file("missing.csv") + " rect:0:1:0:1") ==
        3);
}

TEST_CASE("unsound parameters are recorded when not strict") {
  TempDir dir;
  const std::string prefix = dir.file("u");
  REQUIRE(run_cli("compute --map fab:1:1 --k 8 --n 1 --m 5 --out-prefix " +
                  prefix) == 0);
  CHECK(slurp(prefix + ".meta").find("sound=0") != std::string::npos);
  CHECK(slurp(prefix + ".boxes.csv").find("sound=0") != std::string::npos);
}

TEST_CASE("direct: identity map gives zero rows, F11 hits the fixed point") {
  TempDir dir;
  const std::string p_id = dir.file("id");
  REQUIRE(run_cli("direct --map id --grid 10 --n 5 --out-prefix " + p_id) == 0);
  std::ifstream in(p_id + ".vectors.csv");
  std::string line;
  std::getline(in, line);  // header comment
  int rows = 0;
  while (std::getline(in, line)) {
    CHECK(line == "0,0");
    ++rows;
  }
  CHECK(rows == 100);

  const std::string p_f = dir.file("f");
  REQUIRE(run_cli("direct --map fab:1:1 --grid 100 --n 1 --out-prefix " + p_f) ==
          0);
  CHECK(slurp(p_f + ".vectors.csv").find("\n1,1\n") != std::string::npos);
}

TEST_CASE("bounds command output") {
  TempDir dir;
  const std::string out = dir.file("bounds.txt");
  REQUIRE(run_cli("bounds --map fab:1:1 --eps 0 --n 100 --c 1 --L 2", out) ==
          0);
  const std::string text = slurp(out);
  CHECK(text.find("gamma=0.01\n") != std::string::npos);
  CHECK(text.find("k_n=100\n") != std::string::npos);
  CHECK(text.find("r_n=0\n") != std::string::npos);
  // the max with 2*sqrt(2)/n binds here, since gamma = 0.01 < sqrt(2)/100
  const double expect_total =
      std::max(2.0 * std::numbers::sqrt2 / 100,
               0.01 + std::numbers::sqrt2 / 100);
  CHECK(text.find("total=" + detail::fmt_double(expect_total)) !=
        std::string::npos);
  const double expect_shadow = (std::numbers::sqrt2 + 2.0) / 100;
  CHECK(text.find("shadow=" + detail::fmt_double(expect_shadow)) !=
        std::string::npos);

  // without c the gamma-side values are omitted with a note
  REQUIRE(run_cli("bounds --map fab:1:1 --k 8 --n 100", out) == 0);
  const std::string no_c = slurp(out);
  CHECK(no_c.find("kappa=") != std::string::npos);
  CHECK(no_c.find("gamma=") == std::string::npos);
  CHECK(no_c.find("shadow=") == std::string::npos);
  CHECK(no_c.find("# c not supplied") != std::string::npos);
  CHECK(run_cli("bounds --map fab:1:1 --eps 0.1 --n 10 --L 0.5", out) == 2);
  CHECK(run_cli("bounds --map fab:1:1 --n 10", out) == 2);  // no eps, no k
}

TEST_CASE("hausdorff command") {
  TempDir dir;
  // a unit-square box set
  RotationApprox unit;
  unit.map_label = "id";
  unit.k = 1;
  unit.n = 1;
  unit.m = 2;
  unit.reach = 0.0;
  unit.boxes = BoxSet(1, 0, 0, 1, 1);
  unit.boxes.insert(0, 0);
  const std::string boxes = dir.file("unit.boxes.csv");
  write_box_csv(boxes, unit);

  const std::string out = dir.file("h.txt");
  REQUIRE(run_cli("hausdorff " + boxes + " " + boxes, out) == 0);
  CHECK(slurp(out).find("distance=0\n") != std::string::npos);

  REQUIRE(run_cli("hausdorff " + boxes + " rect:0:2:0:1", out) == 0);
  const std::string text = slurp(out);
  const auto pos = text.find("distance=");
  REQUIRE(pos != std::string::npos);
  const double d = std::stod(text.substr(pos + 9));
  CHECK(std::abs(d - 1.0) <= 1e-3 + 1e-12);
}
