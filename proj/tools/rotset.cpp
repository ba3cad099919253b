// Command-line front end: set-oriented rotation set approximation (compute),
// the pointwise direct method (direct), analytic error budgets (bounds), and
// Hausdorff distance estimates between saved outputs (hausdorff).
//
// Exit codes: 0 success, 2 configuration/input error, 3 I/O error,
// 4 unsound parameters together with --strict.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rotset/bounds.hpp"
#include "rotset/dynamics.hpp"
#include "rotset/evolve.hpp"
#include "rotset/geometry.hpp"
#include "rotset/io.hpp"
#include "rotset/sampling.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitUnsound = 4;

struct CommonArgs {
  std::string map_spec;
  std::string perturb;
  int threads = 1;
  std::uint64_t seed = 1;
};

rotset::MapSpec resolve_map(const CommonArgs& args) {
  rotset::MapSpec map = rotset::parse_map(args.map_spec);
  if (!args.perturb.empty()) {
    const auto parts = rotset::detail::split(args.perturb, ':');
    if (parts.size() != 2)
      throw std::invalid_argument("--perturb expects r1:r2");
    rotset::append_perturbation(map, rotset::detail::parse_real(parts[0]),
                                rotset::detail::parse_real(parts[1]));
  }
  return map;
}

std::string fmt(double v) { return rotset::detail::fmt_double(v); }

int cmd_compute(const CommonArgs& common, int k, int n, double reach_opt,
                int m_opt, double lipschitz_override, bool strict,
                const std::string& out_prefix,
                const std::string& table_cache) {
  const rotset::MapSpec map = resolve_map(common);
  const double L = lipschitz_override > 0.0 ? lipschitz_override
                                            : rotset::lipschitz_bound(map);
  const int m = m_opt > 0 ? m_opt : rotset::default_test_grid_size(L);
  const double R = reach_opt >= 0.0 ? reach_opt : std::numbers::sqrt2 / k;
  const double eta = std::numbers::sqrt2 / (static_cast<double>(k) * (m - 1));
  const bool sound = R >= L * eta;
  if (!sound) {
    if (strict)
      throw rotset::UnsoundParams(
          "unsound parameters: R < L*eta (R=" + fmt(R) + ", L*eta=" +
          fmt(L * eta) + ")");
    std::cerr << "warning: unsound parameters, R < L*eta; the computed set "
                 "may miss parts of the true image\n";
  }

  rotset::TransitionTable table;
  bool cache_hit = false;
  if (!table_cache.empty() && std::filesystem::exists(table_cache)) {
    rotset::TransitionTable cached = rotset::load_table(table_cache, map);
    if (cached.k == k && cached.m == m && cached.reach == R &&
        cached.map_label == map.label) {
      table = std::move(cached);
      cache_hit = true;
    } else {
      std::cerr << "warning: table cache " << table_cache
                << " does not match the requested parameters; rebuilding\n";
    }
  }
  if (!cache_hit) {
    rotset::BuildOptions bopts;
    bopts.threads = common.threads;
    bopts.allow_unsound = true;  // soundness already handled above
    table = rotset::build_table(map, k, m, R, bopts);
    if (!table_cache.empty()) rotset::save_table(table_cache, table);
  }

  rotset::RotationApprox approx;
  approx.map_label = map.label;
  approx.k = k;
  approx.n = n;
  approx.m = m;
  approx.reach = R;
  approx.eta = eta;
  approx.lipschitz = L;
  approx.sound = sound;

  const auto t0 = std::chrono::steady_clock::now();
  rotset::BoxSet s = rotset::initial_set(k);
  approx.layer_counts.push_back(s.count());
  std::vector<double> layer_seconds;
  rotset::AdvanceOptions aopts{common.threads};
  for (int layer = 1; layer <= n; ++layer) {
    const auto l0 = std::chrono::steady_clock::now();
    s = rotset::advance(table, s, aopts);
    const auto l1 = std::chrono::steady_clock::now();
    approx.layer_counts.push_back(s.count());
    layer_seconds.push_back(std::chrono::duration<double>(l1 - l0).count());
  }
  approx.boxes = std::move(s);
  const double total_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  const std::string boxes_path = out_prefix + ".boxes.csv";
  const std::string pgm_path = out_prefix + ".pgm";
  const std::string hull_path = out_prefix + ".hull.csv";
  const std::string meta_path = out_prefix + ".meta";
  const std::string log_path = out_prefix + ".log";

  rotset::write_box_csv(boxes_path, approx);
  rotset::write_pgm(pgm_path, approx);
  const rotset::Polygon hull =
      rotset::convex_hull(rotset::extreme_corners(approx));
  rotset::write_polygon_csv(hull_path, hull);
  rotset::write_metadata(
      meta_path,
      {{"map", map.label},
       {"k", std::to_string(k)},
       {"n", std::to_string(n)},
       {"R", fmt(R)},
       {"m", std::to_string(m)},
       {"L", fmt(L)},
       {"eta", fmt(eta)},
       {"sound", sound ? "1" : "0"},
       {"seed", std::to_string(common.seed)},
       {"threads", std::to_string(common.threads)},
       {"boxes", std::to_string(approx.boxes.count())},
       {"table_targets", std::to_string(table.total_targets())},
       {"table_cache", cache_hit ? "hit" : (table_cache.empty() ? "off"
                                                                : "rebuilt")}});

  // Diagnostics go to a sidecar log, never into the data files.
  {
    rotset::detail::AtomicFile log(log_path);
    auto& out = log.stream();
    out << "# layer, boxes, seconds\n";
    out << "0, " << approx.layer_counts[0] << ", 0\n";
    for (int layer = 1; layer <= n; ++layer)
      out << layer << ", " << approx.layer_counts[layer] << ", "
          << fmt(layer_seconds[layer - 1]) << "\n";
    out << "# total seconds: " << fmt(total_seconds) << "\n";
    log.commit();
  }

  std::cout << "Q_" << n << "* at k=" << k << ": "
            << approx.boxes.count() << " boxes"
            << (sound ? "" : " (UNSOUND parameters)") << "\n"
            << "wrote " << boxes_path << ", " << pgm_path << ", " << hull_path
            << ", " << meta_path << ", " << log_path << "\n";
  return kExitOk;
}

int cmd_direct(const CommonArgs& common, int grid, int n,
               const std::string& out_prefix) {
  const rotset::MapSpec map = resolve_map(common);
  const auto vectors = rotset::sample_Kn(map, n, grid, common.threads);
  const std::string path = out_prefix + ".vectors.csv";
  char header[256];
  std::snprintf(header, sizeof header,
                "direct method: map=%s N=%d n=%d, rows (F^n(x)-x)/n row-major",
                map.label.c_str(), grid, n);
  rotset::write_vectors_csv(path, vectors, header);
  std::cout << "wrote " << path << " (" << vectors.size() << " vectors)\n";
  return kExitOk;
}

int cmd_bounds(const CommonArgs& common, int k, bool k_given, double eps_opt,
               int n, double lipschitz_override, std::optional<double> c) {
  const rotset::MapSpec map = resolve_map(common);
  double eps = eps_opt;
  if (eps < 0.0) {
    if (!k_given || k < 1)
      throw std::invalid_argument("bounds: give --eps or --k to fix epsilon");
    eps = std::numbers::sqrt2 / k;
  }
  const double M = rotset::displacement_bound(map);
  const double L = lipschitz_override > 0.0 ? lipschitz_override
                                            : rotset::lipschitz_bound(map);
  const rotset::ErrorBudget budget =
      rotset::make_error_budget(eps, n, M, L, c);

  std::cout << "eps=" << fmt(budget.eps) << "\n"
            << "n=" << budget.n << "\n"
            << "M=" << fmt(budget.M) << "\n"
            << "L=" << fmt(budget.L) << "\n"
            << "kappa=" << fmt(budget.kappa_value) << "\n";
  if (budget.c) {
    std::cout << "c=" << fmt(*budget.c) << "\n"
              << "gamma=" << fmt(budget.gamma_value->gamma) << "\n"
              << "k_n=" << budget.gamma_value->k_n << "\n"
              << "r_n=" << budget.gamma_value->r_n << "\n"
              << "total=" << fmt(*budget.total) << "\n"
              << "shadow=" << fmt(*budget.shadow) << "\n";
  } else {
    std::cout << "# c not supplied: gamma, total and shadow need the "
                 "bounded-deviation constant\n";
  }
  return kExitOk;
}

// A hausdorff operand: a box CSV (Q_n* box set), a polygon CSV, or an
// inline rectangle "rect:x0:x1:y0:y1".
struct DistanceOperand {
  std::optional<rotset::RotationApprox> approx;
  std::optional<rotset::Polygon> poly;
};

DistanceOperand load_operand(const std::string& spec) {
  DistanceOperand op;
  if (spec.rfind("rect:", 0) == 0) {
    const auto f = rotset::detail::split(spec.substr(5), ':');
    if (f.size() != 4)
      throw std::invalid_argument("rect spec: expected rect:x0:x1:y0:y1");
    op.poly = rotset::make_rect(
        rotset::detail::parse_real(f[0]), rotset::detail::parse_real(f[1]),
        rotset::detail::parse_real(f[2]), rotset::detail::parse_real(f[3]));
    return op;
  }
  std::ifstream probe(spec, std::ios::binary);
  if (!probe) throw rotset::IoError("cannot open: " + spec);
  std::string first_line;
  std::getline(probe, first_line);
  probe.close();
  if (first_line.find("map=") != std::string::npos)
    op.approx = rotset::parse_box_csv(spec);
  else
    op.poly = rotset::parse_polygon_csv(spec);
  return op;
}

int cmd_hausdorff(const std::string& a_spec, const std::string& b_spec,
                  double delta) {
  const DistanceOperand a = load_operand(a_spec);
  const DistanceOperand b = load_operand(b_spec);
  double value = 0.0;
  if (a.approx && b.approx) {
    // Both are box sets: compare their extreme-corner skeletons.
    value = rotset::hausdorff_points(rotset::extreme_corners(*a.approx),
                                     rotset::extreme_corners(*b.approx));
  } else if (a.approx && b.poly) {
    value = rotset::hausdorff_to_polygon(*a.approx, *b.poly, delta);
  } else if (a.poly && b.approx) {
    value = rotset::hausdorff_to_polygon(*b.approx, *a.poly, delta);
  } else {
    value = rotset::hausdorff_points(
        rotset::polygon_boundary_samples(*a.poly, delta),
        rotset::polygon_boundary_samples(*b.poly, delta));
  }
  std::cout << "distance=" << fmt(value) << "\n"
            << "uncertainty=" << fmt(delta) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"set-oriented rotation set approximation for torus maps"};
  app.require_subcommand(1);

  CommonArgs common;
  int k = 8, n = 1, m_opt = -1, grid = 100;
  double reach_opt = -1.0, lipschitz_override = -1.0, eps_opt = -1.0;
  double delta = 1e-3;
  std::optional<double> c;
  bool strict = false;
  std::string out_prefix = "rotset_out", table_cache;
  std::string file_a, file_b;

  auto add_map = [&](CLI::App* cmd, bool required) {
    auto* opt = cmd->add_option("--map", common.map_spec,
                                "map preset or factor chain (fab:a:b, g, "
                                "hshear:amp:freq;vshear:amp:freq;trans:r1:r2)");
    if (required) opt->required();
    cmd->add_option("--perturb", common.perturb,
                    "append a translation r1:r2 after the map");
    cmd->add_option("--threads", common.threads, "worker count");
    cmd->add_option("--seed", common.seed, "random seed (recorded in metadata)");
  };

  CLI::App* compute = app.add_subcommand(
      "compute", "box-covering approximation Q_n* with CSV/PGM/hull outputs");
  add_map(compute, true);
  compute->add_option("--k", k, "grid resolution (boxes per unit)")->required();
  compute->add_option("--n", n, "iteration count")->required();
  compute->add_option("--R", reach_opt, "box-image reach (default sqrt(2)/k)");
  compute->add_option("--m", m_opt, "test points per box side (default ceil(L)+1)");
  compute->add_option("--L", lipschitz_override, "Lipschitz constant override");
  compute->add_flag("--strict", strict, "fail instead of warn on R < L*eta");
  compute->add_option("--out-prefix", out_prefix, "output path prefix");
  compute->add_option("--table-cache", table_cache,
                      "binary transition table cache file");

  CLI::App* direct = app.add_subcommand(
      "direct", "pointwise method: vectors (F^n(x)-x)/n on an N x N grid");
  add_map(direct, true);
  direct->add_option("--grid", grid, "grid side N")->required();
  direct->add_option("--n", n, "iteration count")->required();
  direct->add_option("--out-prefix", out_prefix, "output path prefix");

  CLI::App* bounds = app.add_subcommand(
      "bounds", "analytic error budget (kappa, gamma, total, shadowing)");
  add_map(bounds, true);
  bounds->add_option("--n", n, "iteration count")->required();
  bounds->add_option("--k", k, "grid resolution fixing eps = sqrt(2)/k");
  bounds->add_option("--eps", eps_opt, "box diameter bound (overrides --k)");
  bounds->add_option("--L", lipschitz_override, "Lipschitz constant override");
  bounds->add_option("--c", c, "bounded-deviation constant");

  CLI::App* hausdorff = app.add_subcommand(
      "hausdorff", "distance between two outputs (box CSV, polygon CSV, "
                   "or rect:x0:x1:y0:y1)");
  hausdorff->add_option("fileA", file_a, "first operand")->required();
  hausdorff->add_option("fileB", file_b, "second operand")->required();
  hausdorff->add_option("--delta", delta, "boundary sampling step");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (compute->parsed())
      return cmd_compute(common, k, n, reach_opt, m_opt, lipschitz_override,
                         strict, out_prefix, table_cache);
    if (direct->parsed()) return cmd_direct(common, grid, n, out_prefix);
    if (bounds->parsed())
      return cmd_bounds(common, k, bounds->count("--k") > 0, eps_opt, n,
                        lipschitz_override, c);
    if (hausdorff->parsed()) return cmd_hausdorff(file_a, file_b, delta);
  } catch (const rotset::UnsoundParams& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUnsound;
  } catch (const rotset::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitConfig;
}
