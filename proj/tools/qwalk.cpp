// qwalk <command> --config <file> [--out <dir>]
//
// Subcommands: simulate, spectrum, limit, cocycle, monodromy, verify.
// Every run writes manifest.json (the fully resolved config) next to its
// artifacts; all file writes happen on the main thread.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "qwalk/config.hpp"
#include "qwalk/csv.hpp"
#include "qwalk/verify.hpp"

namespace {

using namespace qwalk;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_manifest(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  write_text(out_dir / "manifest.json", cfg.manifest_text());
}

void run_simulate(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  LatticeState state = evolve(cfg.walk, cfg.initial, cfg.t);
  write_distribution_csv((out_dir / "pt.csv").string(),
                         ScaledDistribution(state, cfg.t));
}

void run_spectrum(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  write_spectrum_csv((out_dir / "spectrum.csv").string(),
                     eigendecompose(cfg.walk, cfg.grid));
}

void run_limit(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  SpectralGrid spectral = eigendecompose(cfg.walk, cfg.grid);
  VelocityField velocity = group_velocity_field(spectral, cfg.walk);
  VelocityMeasure measure =
      limit_measure(spectral, velocity, fourier_state(cfg.initial, cfg.grid));
  write_measure_csv((out_dir / "measure.csv").string(), measure);
  write_operator_field_csv((out_dir / "hfield.csv").string(),
                           h_operator_field(spectral, velocity, cfg.axis));
}

void run_cocycle(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  SpectralGrid spectral = eigendecompose(cfg.walk, cfg.grid);
  VelocityField velocity = group_velocity_field(spectral, cfg.walk);
  OperatorField reference = h_operator_field(spectral, velocity, cfg.axis);
  auto records = convergence_report(cfg.walk, cfg.axis, cfg.t_list, cfg.grid,
                                    reference, cfg.exclusion_radius);
  write_convergence_csv((out_dir / "conv.csv").string(), records);
}

void run_monodromy(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  if (cfg.walk.dimension() != 2)
    throw std::invalid_argument("monodromy: the builtin paths live on the 2-torus");
  auto path = cfg.monodromy.path == "segment"
                  ? exotic_path_segment(cfg.monodromy.eps)
                  : exotic_path_halfcircle(cfg.monodromy.eps);
  Complex start;
  if (cfg.monodromy.start.is_string()) {
    // "auto": the eigenvalue with the largest imaginary part at s=0
    CVector values;
    Matrix vectors;
    if (!detail::unitary_eigensystem(cfg.walk.evaluate(path(0.0)), values, vectors))
      throw std::runtime_error("monodromy: eigensolver failure at the path start");
    int pick = 0;
    for (int j = 1; j < values.size(); ++j)
      if (values(j).imag() > values(pick).imag()) pick = j;
    start = values(pick);
  } else {
    start = Complex(cfg.monodromy.start[0].get<double>(),
                    cfg.monodromy.start[1].get<double>());
  }
  MonodromyResult result =
      monodromy_probe(cfg.walk, path, cfg.monodromy.steps, start);
  Json report;
  report["path"] = cfg.monodromy.path;
  report["eps"] = cfg.monodromy.eps;
  report["steps_used"] = result.steps_used;
  report["start"] = Json::array({result.trace.front().real(),
                                 result.trace.front().imag()});
  report["endpoint"] =
      Json::array({result.endpoint.real(), result.endpoint.imag()});
  Json trace = Json::array();
  for (const Complex& z : result.trace)
    trace.push_back(Json::array({z.real(), z.imag()}));
  report["trace"] = trace;
  write_text(out_dir / "monodromy.json", report.dump(2) + "\n");
}

int run_verify() {
  auto results = run_verify_suite(&std::cout);
  bool ok = all_pass(results);
  std::cout << (ok ? "all criteria passed" : "FAILURES PRESENT") << std::endl;
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quantum walk simulation and spectral analysis"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir_str = ".";
  const std::vector<std::string> commands{"simulate", "spectrum", "limit",
                                          "cocycle",  "monodromy", "verify"};
  for (const std::string& name : commands) {
    CLI::App* sub = app.add_subcommand(name);
    if (name != "verify")
      sub->add_option("--config", config_path, "run configuration file")->required();
    else
      sub->add_option("--config", config_path, "ignored; the suite is self-contained");
    sub->add_option("--out", out_dir_str, "output directory (default .)");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    if (command == "verify") return run_verify();

    RunConfig cfg = parse_config(read_file(config_path));
    std::filesystem::path out_dir(out_dir_str);
    std::filesystem::create_directories(out_dir);
    write_manifest(cfg, out_dir);

    if (command == "simulate")
      run_simulate(cfg, out_dir);
    else if (command == "spectrum")
      run_spectrum(cfg, out_dir);
    else if (command == "limit")
      run_limit(cfg, out_dir);
    else if (command == "cocycle")
      run_cocycle(cfg, out_dir);
    else if (command == "monodromy")
      run_monodromy(cfg, out_dir);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << command << ": " << e.what() << std::endl;
    return 1;
  }
}
