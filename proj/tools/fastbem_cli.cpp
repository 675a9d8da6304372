// Batch driver: convergence studies, compression benchmarks and oracle checks.
// All output is CSV with a header row.

#include <fastbem/fastbem.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <regex>

using namespace fastbem;

namespace {

struct Options {
  std::string levels;
  std::string mesh_path;
  std::vector<std::string> methods{"hca"};
  std::vector<std::string> problems{"dtn"};
  std::vector<std::string> cases{"poly"};
  std::vector<std::string> kinds{"slp", "dlp", "hyp"};
  std::optional<int> order, q_near, leaf_size, max_it;
  std::optional<double> eta, eps_aca, eps_solver;
  std::uint64_t seed = 1;
  int threads = 0;
  std::string out;
  bool corrupt = false;
};

std::pair<int, int> parse_levels(const std::string &s) {
  static const std::regex range(R"(^\s*(\d+)\s*(?:(?:\.\.|:|-)\s*(\d+))?\s*$)");
  std::smatch m;
  if (!std::regex_match(s, m, range)) throw CLI::ValidationError("--sphere-level", "expected l or l0..l1");
  const int a = std::stoi(m[1]);
  const int b = m[2].matched ? std::stoi(m[2]) : a;
  if (b < a || b > 9) throw CLI::ValidationError("--sphere-level", "bad level range " + s);
  return {a, b};
}

/// Sphere levels follow the tabulated schedule; explicit flags override it.
Parameters parameters_for(const Options &o, std::optional<int> level) {
  Parameters p = level ? sphere_schedule(*level) : Parameters{};
  if (o.order) p.order = *o.order;
  if (o.q_near) p.q_near = *o.q_near;
  if (o.leaf_size) p.leaf_size = *o.leaf_size;
  if (o.max_it) p.max_it = *o.max_it;
  if (o.eta) p.eta = *o.eta;
  if (o.eps_aca) {
    p.eps_aca = *o.eps_aca;
    p.eps_comp = *o.eps_aca;
    if (!o.eps_solver) p.eps_slv = 0.1 * *o.eps_aca;
  }
  if (o.eps_solver) p.eps_slv = *o.eps_solver;
  return p;
}

struct Case {
  std::optional<int> level;
  SurfaceMesh mesh;
};

std::vector<Case> meshes(const Options &o) {
  std::vector<Case> out;
  if (!o.mesh_path.empty()) {
    out.push_back({std::nullopt, read_mesh(o.mesh_path)});
    return out;
  }
  const auto [a, b] = parse_levels(o.levels.empty() ? "2" : o.levels);
  for (int l = a; l <= b; ++l) out.push_back({l, sphere_mesh(l)});
  return out;
}

KernelKind parse_kind(const std::string &s) {
  if (s == "slp") return KernelKind::slp;
  if (s == "dlp") return KernelKind::dlp_y;
  if (s == "hyp") return KernelKind::hyp;
  throw std::invalid_argument("unknown operator '" + s + "'");
}

class Output {
public:
  explicit Output(const std::string &path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw std::runtime_error("cannot open " + path);
    }
  }
  std::ostream &os() { return file_ ? *file_ : std::cout; }
  void line(const std::string &s) { os() << s << '\n' << std::flush; }

private:
  std::unique_ptr<std::ofstream> file_;
};

int run_convergence(const Options &o) {
  Output out(o.out);
  out.line(convergence_header());
  for (const Case &c : meshes(o)) {
    const Parameters p = parameters_for(o, c.level);
    const Geometry geo(c.mesh, p);
    for (const auto &m : o.methods) {
      const OperatorTriple ops = build_operators(geo, parse_method(m));
      for (const auto &pr : o.problems)
        for (const auto &tc : o.cases)
          out.line(format_row(solve_problem(c.mesh, ops, parse_method(m), parse_problem(pr),
                                            parse_test_case(tc), p)));
    }
  }
  return 0;
}

int run_bench(const Options &o) {
  Output out(o.out);
  out.line(bench_header());
  for (const Case &c : meshes(o)) {
    const Parameters p = parameters_for(o, c.level);
    for (const auto &m : o.methods)
      out.line(format_bench(compress_bench(c.mesh, c.level.value_or(-1), parse_method(m), p)));
  }
  return 0;
}

/// Test hook: perturbs the first far-field block so the oracle must fail.
void corrupt_first_block(AnyMatrix &a) {
  std::visit(
      [](auto &m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, HMatrix>) {
          if (!m.block_tree().farfield().empty()) m.farfield(0).A *= 2.0;
        } else if constexpr (std::is_same_v<T, H2Matrix>) {
          if (!m.block_tree().farfield().empty()) m.coupling(0) *= 2.0;
        }
      },
      a.get());
}

int run_oracle(const Options &o) {
  Output out(o.out);
  out.os() << "n,operator,method,frobenius,matvec,worst_block,pass\n";
  bool ok = true;
  for (const Case &c : meshes(o)) {
    const Parameters p = parameters_for(o, c.level);
    const Geometry geo(c.mesh, p);
    for (const auto &m : o.methods) {
      OperatorBuilder b(geo, parse_method(m));
      for (const auto &ks : o.kinds) {
        const KernelKind k = parse_kind(ks);
        const Matrix ref = assemble_dense(*geo.assembler, k, p.dense_cap);
        AnyMatrix a = b.build(k);
        if (o.corrupt) corrupt_first_block(a);
        const OracleRow r = compare_with_dense(a, ref, k, parse_method(m), 10 * p.eps_aca, o.seed);
        ok = ok && r.pass;
        char buf[256];
        std::snprintf(buf, sizeof buf, "%d,%s,%s,%.6e,%.6e,%s,%s", c.mesh.triangle_count(),
                      to_string(k), m.c_str(), r.frobenius, r.matvec,
                      r.worst_block.empty() ? "-" : r.worst_block.c_str(), r.pass ? "pass" : "FAIL");
        out.line(buf);
        if (!r.pass)
          std::cerr << "oracle check failed for " << to_string(k) << " (" << m
                    << "), worst far-field block " << r.worst_block << '\n';
      }
    }
  }
  return ok ? 0 : 1;
}

void add_common(CLI::App *cmd, Options &o) {
  auto *level = cmd->add_option("--sphere-level", o.levels, "sphere level l or range l0..l1");
  auto *mesh = cmd->add_option("--mesh", o.mesh_path, "mesh file")->check(CLI::ExistingFile);
  level->excludes(mesh);
  cmd->add_option("--method", o.methods, "hca, gca or dense (several allowed)")
      ->check(CLI::IsMember({"hca", "gca", "dense"}));
  cmd->add_option("--order", o.order, "interpolation / Green quadrature order m")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--quad-order", o.q_near, "near-field quadrature order")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--leaf-size", o.leaf_size, "cluster leaf size")->check(CLI::PositiveNumber);
  cmd->add_option("--eta", o.eta, "admissibility parameter")->check(CLI::PositiveNumber);
  cmd->add_option("--eps-aca", o.eps_aca, "cross approximation tolerance")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--eps-solver", o.eps_solver, "CG relative residual")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-it", o.max_it, "CG iteration limit")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "seed for random test vectors");
  cmd->add_option("--threads", o.threads, "worker threads (0: all)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--out", o.out, "CSV output file (default stdout)");
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"fastbem: boundary element compression studies"};
  app.require_subcommand(1);
  Options o;

  auto *conv = app.add_subcommand("convergence", "solve DtN / NtD problems on sphere levels");
  add_common(conv, o);
  conv->add_option("--problem", o.problems, "dtn or ntd")->check(CLI::IsMember({"dtn", "ntd"}));
  conv->add_option("--test-case", o.cases, "poly, point1 or point2")
      ->check(CLI::IsMember({"poly", "point1", "point2"}));

  auto *bench = app.add_subcommand("compress-bench", "setup time, storage and ranks per level");
  add_common(bench, o);

  auto *oracle = app.add_subcommand("oracle-check", "compare compressed and dense operators");
  add_common(oracle, o);
  oracle->add_option("--operator", o.kinds, "slp, dlp or hyp")
      ->check(CLI::IsMember({"slp", "dlp", "hyp"}));
  oracle->add_flag("--corrupt-block", o.corrupt, "perturb one far-field block (test hook)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    set_thread_count(o.threads);
    if (*conv) return run_convergence(o);
    if (*bench) return run_bench(o);
    return run_oracle(o);
  } catch (const CLI::ValidationError &e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
