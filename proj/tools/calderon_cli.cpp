// Command-line front end: mesh generation, forward simulation, gradient
// checking, inversion presets, and the 1-D non-uniqueness demo.
//
// Exit codes: 0 success, 1 validation or usage error, 2 solver failure,
// 3 gradient check failure.

#include "calderon/adjoint.hpp"
#include "calderon/analytic1d.hpp"
#include "calderon/config.hpp"
#include "calderon/fem.hpp"
#include "calderon/inversion.hpp"
#include "calderon/mesh.hpp"
#include "calderon/presets.hpp"
#include "calderon/regularization.hpp"
#include "calderon/types.hpp"
#include "calderon/vtk.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace calderon;

constexpr int kExitValidation = 1;
constexpr int kExitSolver = 2;
constexpr int kExitCheckFailed = 3;

Vector parse_reals(const std::string& text) {
  std::vector<Real> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    size_t pos = 0;
    Real v = std::stod(item, &pos);
    while (pos < item.size() && std::isspace(static_cast<unsigned char>(item[pos]))) ++pos;
    if (pos != item.size()) throw std::invalid_argument("bad number '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("empty number list '" + text + "'");
  return Eigen::Map<const Vector>(out.data(), static_cast<Index>(out.size()));
}

IntVector parse_ints(const std::string& text) {
  Vector reals = parse_reals(text);
  IntVector out(reals.size());
  for (Index i = 0; i < reals.size(); ++i) {
    out(i) = static_cast<int>(std::llround(reals(i)));
    if (out(i) != reals(i)) throw std::invalid_argument("expected integer in '" + text + "'");
  }
  return out;
}

struct BoxSpec {
  Vector lower;
  Vector upper;
};

// "0,0,0:1,1,0.05" -> lower:upper corners.
BoxSpec parse_box(const std::string& text) {
  auto colon = text.find(':');
  if (colon == std::string::npos)
    throw std::invalid_argument("box must be 'lower:upper', got '" + text + "'");
  BoxSpec box;
  box.lower = parse_reals(text.substr(0, colon));
  box.upper = parse_reals(text.substr(colon + 1));
  if (box.lower.size() != box.upper.size())
    throw std::invalid_argument("box corners have different dimensions");
  return box;
}

std::filesystem::path resolve_outdir(const std::string& dir) {
  std::filesystem::path path = dir.empty() ? "." : dir;
  std::filesystem::create_directories(path);
  return path;
}

// --set key=value overrides, applied after any config file.
void apply_overrides(Config& config, const std::vector<std::string>& sets) {
  for (const auto& entry : sets) {
    auto eq = entry.find('=');
    if (eq == std::string::npos || eq == 0)
      throw std::invalid_argument("--set expects key=value, got '" + entry + "'");
    std::string key = entry.substr(0, eq);
    std::string value = entry.substr(eq + 1);
    auto strip = [](std::string s) {
      auto b = s.find_first_not_of(" \t");
      auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    config.set(strip(key), strip(value));
  }
}

Config load_config(const std::string& file, const std::vector<std::string>& sets) {
  Config config = file.empty() ? Config() : Config::parse_file(file);
  apply_overrides(config, sets);
  return config;
}

std::string two_digits(int n) {
  std::ostringstream os;
  os << std::setw(2) << std::setfill('0') << n;
  return os.str();
}

RowVector face_centroid(const SimplexMesh& mesh, Index face) {
  RowVector c = RowVector::Zero(mesh.dim);
  for (Index i = 0; i < mesh.bface_nodes.cols(); ++i)
    c += mesh.nodes.row(mesh.bface_nodes(face, i));
  return c / static_cast<Real>(mesh.bface_nodes.cols());
}

// Per-face flux table: computed flux against the measured target.
void write_flux_csv(const std::filesystem::path& path, const SimplexMesh& mesh,
                    const FaceField& flux, const Measurement& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << std::setprecision(17);
  out << "face_id,x,y,z,flux,target_flux,active\n";
  for (Index f = 0; f < mesh.n_bfaces(); ++f) {
    RowVector c = face_centroid(mesh, f);
    out << f;
    for (int d = 0; d < 3; ++d) out << ',' << (d < mesh.dim ? c(d) : 0.0);
    out << ',' << flux(f) << ',' << m.target_flux(f) << ','
        << static_cast<int>(m.active[static_cast<size_t>(f)]) << '\n';
  }
}

void write_k_vtk(const std::filesystem::path& path, const SimplexMesh& mesh,
                 const ElementField& k, const std::string& title) {
  VtkFields fields;
  fields.cell_scalars.emplace_back("k", k);
  write_vtk(path.string(), mesh, fields, title);
}

// One VTK (potential + conductivity) and one flux CSV per experiment,
// all evaluated at the supplied conductivity.
void write_measurement_outputs(const std::filesystem::path& outdir, const SimplexMesh& mesh,
                               const ElementGeometry& geom, const ElementField& k,
                               const std::vector<Measurement>& measurements,
                               const SolverOptions& opts) {
  for (size_t i = 0; i < measurements.size(); ++i) {
    const Measurement& m = measurements[i];
    NodalField u = solve_forward(mesh, geom, k, m.dirichlet, opts);
    FaceField flux = boundary_normal_flux(mesh, geom, k, u);
    VtkFields fields;
    fields.point_scalars.emplace_back("u", u);
    fields.cell_scalars.emplace_back("k", k);
    std::string tag = two_digits(static_cast<int>(i));
    write_vtk((outdir / ("measurement_" + tag + ".vtk")).string(), mesh, fields,
              "experiment " + std::to_string(m.id));
    write_flux_csv(outdir / ("flux_" + tag + ".csv"), mesh, flux, m);
  }
}

void write_run_info(const std::filesystem::path& path, const ExperimentSetup& setup,
                    const Config& config, const std::string& mode_name,
                    const ConvergenceHistory& history, int n_solves, bool converged,
                    const std::string& stop_reason) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << std::setprecision(17);
  out << "[run]\n";
  out << "preset = " << setup.name << "\n";
  out << "mode = " << mode_name << "\n";
  out << "seed = " << setup.seed << "\n";
  out << "dim = " << setup.mesh.dim << "\n";
  out << "nodes = " << setup.mesh.n_nodes() << "\n";
  out << "elements = " << setup.mesh.n_elements() << "\n";
  out << "measurements = " << setup.measurements.size() << "\n";
  out << "\n[result]\n";
  if (!history.empty()) {
    const ConvergenceRecord& last = history.back();
    out << "iterations = " << last.iter << "\n";
    out << "cost = " << last.cost << "\n";
    out << "flux_error = " << last.flux_error << "\n";
    out << "k_l2_error = " << last.k_error << "\n";
  }
  out << "n_solves = " << n_solves << "\n";
  out << "converged = " << (converged ? "true" : "false") << "\n";
  out << "stop_reason = " << stop_reason << "\n";
  out << "\n[config]\n";
  for (const auto& [key, value] : config.entries()) out << key << " = " << value << "\n";
}

const char* mode_name(ExperimentSetup::Mode mode) {
  switch (mode) {
    case ExperimentSetup::Mode::element_adjoint: return "element_adjoint";
    case ExperimentSetup::Mode::region_fd: return "region_fd";
    case ExperimentSetup::Mode::region_projected: return "region_projected";
    case ExperimentSetup::Mode::parametric_disk: return "parametric_disk";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// mesh

int cmd_mesh(const std::string& box_text, const std::string& div_text,
             const std::string& output) {
  BoxSpec box = parse_box(box_text);
  IntVector divisions = parse_ints(div_text);
  SimplexMesh mesh = generate_box_mesh(box.lower, box.upper, divisions);
  write_mesh(mesh, output);
  std::cout << "wrote " << output << ": dim " << mesh.dim << ", " << mesh.n_nodes()
            << " nodes, " << mesh.n_elements() << " elements, " << mesh.n_bfaces()
            << " boundary faces\n";
  return 0;
}

// ---------------------------------------------------------------------------
// forward

int cmd_forward(const std::string& preset, const std::string& config_file,
                const std::vector<std::string>& sets, const std::string& outdir_text) {
  Config config = load_config(config_file, sets);
  ExperimentSetup setup = build_preset(preset, config);
  std::filesystem::path outdir = resolve_outdir(outdir_text);

  write_k_vtk(outdir / "k_target.vtk", setup.mesh, setup.k_target, "target conductivity");
  write_measurement_outputs(outdir, setup.mesh, setup.geom, setup.k_target,
                            setup.measurements, setup.descent.solver);
  std::cout << "forward '" << setup.name << "': " << setup.measurements.size()
            << " experiment(s) on " << setup.mesh.n_elements() << " elements -> "
            << outdir.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// gradcheck

int cmd_gradcheck(const std::string& preset, const std::string& config_file,
                  const std::vector<std::string>& sets, const std::string& outdir_text,
                  int samples, Real step_rel, Real tolerance, int region_dofs,
                  bool corrupt) {
  Config config = load_config(config_file, sets);
  // Small default mesh so the finite-difference sweep stays cheap.
  if (!config.has("mesh.divisions")) config.set("mesh.divisions", "9,9,1");
  if (region_dofs > 0) config.set("regions.dofs", std::to_string(region_dofs));
  ExperimentSetup setup = build_preset(preset, config);

  SolverOptions opts = setup.descent.solver;
  opts.rel_tol = std::min(opts.rel_tol, 1e-12);

  // The check runs away from the target conductivity (at the target the
  // residuals, and with them both gradients, vanish). One generator
  // drives the conductivity draw and the element sampling.
  std::mt19937_64 rng(setup.seed);
  std::uniform_real_distribution<Real> draw(0.5, 3.0);
  ElementField k_test(setup.mesh.n_elements());
  for (Index e = 0; e < k_test.size(); ++e) k_test(e) = draw(rng);

  ObjectiveResult objective =
      total_gradient(setup.mesh, setup.geom, k_test, setup.measurements, true, opts);
  std::filesystem::path outdir = resolve_outdir(outdir_text);
  std::ofstream csv(outdir / "gradcheck.csv");
  if (!csv) throw std::runtime_error("cannot open gradcheck.csv");
  csv << std::setprecision(17) << "element_id,adjoint_grad,fd_grad,rel_error\n";

  std::vector<int> ids;
  Vector adjoint_grad;
  Vector fd_grad;
  if (region_dofs > 0) {
    RegionMap regions =
        make_lattice_regions(setup.mesh, setup.geom, setup.region_divisions);
    Vector projected = project_gradient(objective.gradient, regions);
    adjoint_grad.resize(regions.n_regions);
    for (int r = 0; r < regions.n_regions; ++r)
      adjoint_grad(r) = projected(r) * regions.region_volume(r);
    fd_grad = fd_gradient_regions(setup.mesh, setup.geom, k_test, regions,
                                  setup.measurements, step_rel, nullptr, opts);
    ids.resize(static_cast<size_t>(regions.n_regions));
    for (int r = 0; r < regions.n_regions; ++r) ids[static_cast<size_t>(r)] = r;
  } else {
    std::vector<int> all(static_cast<size_t>(setup.mesh.n_elements()));
    for (size_t e = 0; e < all.size(); ++e) all[e] = static_cast<int>(e);
    samples = std::min<int>(samples, static_cast<int>(all.size()));
    std::sample(all.begin(), all.end(), std::back_inserter(ids), samples, rng);
    fd_grad = fd_gradient_elements(setup.mesh, setup.geom, k_test,
                                   setup.measurements, ids, step_rel, nullptr, opts);
    adjoint_grad.resize(static_cast<Index>(ids.size()));
    for (size_t i = 0; i < ids.size(); ++i) adjoint_grad(static_cast<Index>(i)) =
        objective.gradient(ids[i]);
  }

  if (corrupt) adjoint_grad *= 1.01;  // test hook: force a visible mismatch

  Real worst = 0;
  for (size_t i = 0; i < ids.size(); ++i) {
    Real a = adjoint_grad(static_cast<Index>(i));
    Real f = fd_grad(static_cast<Index>(i));
    Real scale = std::max(std::abs(a), std::abs(f));
    Real rel = scale > 0 ? std::abs(a - f) / scale : 0.0;
    worst = std::max(worst, rel);
    csv << ids[i] << ',' << a << ',' << f << ',' << rel << '\n';
  }
  std::cout << "gradcheck '" << setup.name << "' (seed " << setup.seed << "): "
            << ids.size() << " " << (region_dofs > 0 ? "regions" : "elements")
            << ", max rel_error " << worst << "\n";
  if (worst > tolerance) {
    std::cerr << "gradient check FAILED: max rel_error " << worst << " > " << tolerance
              << "\n";
    return kExitCheckFailed;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// oned-demo

void print_oned_demo(std::ostream& out, Real length, int layers, Real target_resistance,
                     std::uint64_t seed) {
  std::vector<std::pair<std::string, LayeredProfile1D>> profiles;
  auto uniform = [&](const Vector& values) {
    LayeredProfile1D p;
    p.breakpoints = Vector::LinSpaced(values.size() + 1, 0.0, length);
    p.values = values;
    return p;
  };
  profiles.emplace_back("a", uniform(Vector::Constant(4, 1.0)));
  profiles.emplace_back("b", uniform((Vector(4) << 2.0, 2.0, 2.0 / 3.0, 2.0 / 3.0).finished()));
  profiles.emplace_back("c", uniform((Vector(4) << 10.0, 5.0, 2.0, 10.0 / 32.0).finished()));
  auto family = nonuniqueness_family(target_resistance, length, layers, 1, seed);
  profiles.emplace_back("random", family.front());

  out << std::setprecision(17);
  out << "profile,layer,x_left,x_right,k,u_left,u_right,current\n";
  for (const auto& [name, profile] : profiles) {
    Vector u = breakpoint_potentials(profile, 1.0, 0.0);
    Real c = current(profile, 1.0, 0.0);
    for (Index i = 0; i < profile.n_layers(); ++i) {
      out << name << ',' << i << ',' << profile.breakpoints(i) << ','
          << profile.breakpoints(i + 1) << ',' << profile.values(i) << ',' << u(i) << ','
          << u(i + 1) << ',' << c << '\n';
    }
  }
}

int cmd_oned_demo(Real length, int layers, Real target_resistance, std::uint64_t seed,
                  const std::string& output) {
  if (output.empty()) {
    print_oned_demo(std::cout, length, layers, target_resistance, seed);
  } else {
    std::ofstream out(output);
    if (!out) throw std::runtime_error("cannot open " + output);
    print_oned_demo(out, length, layers, target_resistance, seed);
    std::cout << "wrote " << output << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// invert

struct InversionOutputs {
  ElementField k_initial;
  ElementField k_final;
  ConvergenceHistory history;
  int n_solves = 0;
  bool converged = false;
  std::string stop_reason;
};

void emit_inversion(const std::filesystem::path& outdir, const ExperimentSetup& setup,
                    const Config& config, const InversionOutputs& run) {
  write_history_csv((outdir / "history.csv").string(), run.history);
  write_k_vtk(outdir / "k_initial.vtk", setup.mesh, run.k_initial, "initial conductivity");
  write_k_vtk(outdir / "k_final.vtk", setup.mesh, run.k_final, "recovered conductivity");
  write_k_vtk(outdir / "k_target.vtk", setup.mesh, setup.k_target, "target conductivity");
  write_measurement_outputs(outdir, setup.mesh, setup.geom, run.k_final, setup.measurements,
                            setup.descent.solver);
  write_run_info(outdir / "run_info.txt", setup, config, mode_name(setup.mode), run.history,
                 run.n_solves, run.converged, run.stop_reason);
}

int cmd_invert(const std::string& preset, const std::string& config_file,
               const std::vector<std::string>& sets, const std::string& outdir_text,
               int snapshot_every) {
  if (preset == "oned-demo") {
    Config config = load_config(config_file, sets);
    std::filesystem::path outdir = resolve_outdir(outdir_text);
    std::uint64_t seed =
        static_cast<std::uint64_t>(config.get_real("run.seed", 20260819.0));
    std::ofstream out(outdir / "oned_demo.csv");
    if (!out) throw std::runtime_error("cannot open oned_demo.csv");
    print_oned_demo(out, config.get_real("oned.length", 1.0),
                    config.get_int("oned.layers", 4),
                    config.get_real("oned.resistance", 1.0), seed);
    std::cout << "wrote " << (outdir / "oned_demo.csv").string() << "\n";
    return 0;
  }

  Config config = load_config(config_file, sets);
  ExperimentSetup setup = build_preset(preset, config);
  std::filesystem::path outdir = resolve_outdir(outdir_text);

  SnapshotCallback snapshot;
  if (snapshot_every > 0) {
    snapshot = [&outdir, &setup, snapshot_every](int iteration, const ElementField& k,
                                                 const DescentResult&) {
      if (iteration % snapshot_every != 0) return;
      std::ostringstream name;
      name << "k_iter_" << std::setw(4) << std::setfill('0') << iteration << ".vtk";
      write_k_vtk(outdir / name.str(), setup.mesh, k,
                  "iteration " + std::to_string(iteration));
    };
  }

  InversionOutputs run;
  try {
    switch (setup.mode) {
      case ExperimentSetup::Mode::element_adjoint: {
        ElementField k0 = ElementField::Constant(setup.mesh.n_elements(), setup.k0);
        run.k_initial = k0;
        DescentResult result = run_descent(setup.mesh, setup.geom, setup.measurements, k0,
                                           setup.descent, &setup.k_target, snapshot);
        run.k_final = result.k;
        run.history = std::move(result.history);
        run.n_solves = result.n_solves;
        run.converged = result.converged;
        run.stop_reason = result.stop_reason;
        break;
      }
      case ExperimentSetup::Mode::region_fd:
      case ExperimentSetup::Mode::region_projected: {
        RegionMap regions =
            make_lattice_regions(setup.mesh, setup.geom, setup.region_divisions);
        Vector kappa0 = Vector::Constant(regions.n_regions, setup.k0);
        run.k_initial = expand_regions(regions, kappa0);
        RegionGradient grad = setup.mode == ExperimentSetup::Mode::region_fd
                                  ? RegionGradient::finite_difference
                                  : RegionGradient::projected_adjoint;
        DescentResult result =
            run_region_descent(setup.mesh, setup.geom, setup.measurements, regions, kappa0,
                               grad, setup.descent, &setup.k_target, snapshot);
        run.k_final = result.k;
        run.history = std::move(result.history);
        run.n_solves = result.n_solves;
        run.converged = result.converged;
        run.stop_reason = result.stop_reason;
        break;
      }
      case ExperimentSetup::Mode::parametric_disk: {
        run.k_initial = disk_field(setup.geom, setup.disk_initial, setup.disk_background);
        ParametricResult result =
            run_parametric_disk(setup.mesh, setup.geom, setup.measurements,
                                setup.disk_initial, setup.disk_background, setup.descent,
                                &setup.k_target);
        run.k_final = disk_field(setup.geom, result.params, setup.disk_background);
        run.history = std::move(result.history);
        run.n_solves = result.n_solves;
        run.converged = result.converged;
        run.stop_reason = result.stop_reason;
        std::cout << "disk: x " << result.params.x << ", y " << result.params.y
                  << ", radius " << result.params.radius << ", k " << result.params.k
                  << "\n";
        break;
      }
    }
  } catch (const DescentError& err) {
    // Flush what the run produced before the solver gave up.
    const DescentResult& partial = err.partial();
    run.k_final = partial.k.size() > 0 ? partial.k : run.k_initial;
    run.history = partial.history;
    run.n_solves = partial.n_solves;
    run.converged = false;
    run.stop_reason = err.what();
    emit_inversion(outdir, setup, config, run);
    throw;
  }

  emit_inversion(outdir, setup, config, run);

  const ConvergenceRecord& last = run.history.back();
  std::cout << "invert '" << setup.name << "' [" << mode_name(setup.mode) << "]: "
            << last.iter << " iterations, cost " << run.history.front().cost << " -> "
            << last.cost << ", flux error " << last.flux_error << ", k error "
            << last.k_error << " (" << run.stop_reason << ") -> " << outdir.string()
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-element toolkit for the inverse conductivity problem"};
  app.require_subcommand(1);

  std::string box_text;
  std::string div_text;
  std::string mesh_output = "mesh.txt";
  CLI::App* mesh_cmd = app.add_subcommand("mesh", "Generate a structured simplex box mesh");
  mesh_cmd->add_option("--box", box_text, "Domain corners lower:upper, e.g. 0,0,0:1,1,0.05")
      ->required();
  mesh_cmd->add_option("--div", div_text, "Cells per axis, e.g. 20,20,1")->required();
  mesh_cmd->add_option("-o,--output", mesh_output, "Mesh file path");

  std::string preset = "square-constant";
  std::string config_file;
  std::vector<std::string> sets;
  std::string outdir;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--preset", preset, "Preset name");
    cmd->add_option("--config", config_file, "Config file (key=value with [sections])");
    cmd->add_option("--set", sets, "Override config entries, e.g. --set descent.alpha=0.5");
    cmd->add_option("--output-dir", outdir, "Artifact directory")
        ->envname("CALDERON_OUTDIR");
  };

  CLI::App* forward_cmd =
      app.add_subcommand("forward", "Solve the target-conductivity forward problem");
  add_common(forward_cmd);

  int samples = 10;
  Real step_rel = 1e-3;
  Real tolerance = 1e-3;
  int region_dofs = 0;
  bool corrupt = false;
  CLI::App* grad_cmd = app.add_subcommand(
      "gradcheck", "Compare the adjoint gradient against central finite differences");
  add_common(grad_cmd);
  grad_cmd->add_option("--samples", samples, "Sampled element count")
      ->check(CLI::PositiveNumber);
  grad_cmd->add_option("--step", step_rel, "Relative finite-difference step");
  grad_cmd->add_option("--tolerance", tolerance, "Failure threshold on rel_error");
  grad_cmd->add_option("--dofs", region_dofs,
                       "Check region-projected gradients on this many lattice regions");
  grad_cmd->add_flag("--corrupt", corrupt, "Test hook: perturb the adjoint gradient");

  int snapshot_every = 0;
  CLI::App* invert_cmd = app.add_subcommand("invert", "Run an inversion preset");
  add_common(invert_cmd);
  invert_cmd->add_option("--measurements", "Number of boundary experiments")
      ->check(CLI::PositiveNumber);
  invert_cmd->add_option("--dofs", "Inversion unknowns: 'element' or a region count");
  invert_cmd->add_option("--seed", "RNG seed")->check(CLI::NonNegativeNumber);
  invert_cmd->add_option("--snapshot-every", snapshot_every,
                         "Write a conductivity VTK every N iterations");

  Real demo_length = 1.0;
  int demo_layers = 4;
  Real demo_resistance = 1.0;
  std::uint64_t demo_seed = 20260819;
  std::string demo_output;
  CLI::App* demo_cmd = app.add_subcommand(
      "oned-demo", "Print layered 1-D profiles sharing identical boundary data");
  demo_cmd->add_option("--length", demo_length, "Bar length")->check(CLI::PositiveNumber);
  demo_cmd->add_option("--layers", demo_layers, "Layer count for the random profile")
      ->check(CLI::PositiveNumber);
  demo_cmd->add_option("--resistance", demo_resistance, "Shared total resistance")
      ->check(CLI::PositiveNumber);
  demo_cmd->add_option("--seed", demo_seed, "RNG seed");
  demo_cmd->add_option("-o,--output", demo_output, "Write CSV here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  // Flag shortcuts become config overrides so presets see one source of truth.
  if (invert_cmd->parsed()) {
    if (invert_cmd->count("--measurements"))
      sets.push_back("measurements.count=" +
                     invert_cmd->get_option("--measurements")->as<std::string>());
    if (invert_cmd->count("--dofs"))
      sets.push_back("regions.dofs=" + invert_cmd->get_option("--dofs")->as<std::string>());
    if (invert_cmd->count("--seed"))
      sets.push_back("run.seed=" + invert_cmd->get_option("--seed")->as<std::string>());
  }

  try {
    if (mesh_cmd->parsed()) return cmd_mesh(box_text, div_text, mesh_output);
    if (forward_cmd->parsed()) return cmd_forward(preset, config_file, sets, outdir);
    if (grad_cmd->parsed())
      return cmd_gradcheck(preset, config_file, sets, outdir, samples, step_rel, tolerance,
                           region_dofs, corrupt);
    if (invert_cmd->parsed())
      return cmd_invert(preset, config_file, sets, outdir, snapshot_every);
    if (demo_cmd->parsed())
      return cmd_oned_demo(demo_length, demo_layers, demo_resistance, demo_seed,
                           demo_output);
  } catch (const SolverError& err) {
    std::cerr << "solver failure: " << err.what() << "\n";
    return kExitSolver;
  } catch (const ParseError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitValidation;
  }
  return 0;
}
