// ccatrack command-line front end: scenario runs, parameter sweeps, codebook
// inspection/export and the latency report.
#include <CLI11.hpp>

#include <iostream>

#include "ccatrack/sim.hpp"

using namespace ccatrack;

namespace {

SimConfig load_or_default(const std::string& path) {
  if (path.empty()) return SimConfig{};
  return load_config(path);
}

int cmd_run(const std::string& config_path, std::uint64_t seed, int runs,
            const std::string& out_dir, const std::string& scheme) {
  SimConfig cfg = load_or_default(config_path);
  if (seed != 0) cfg.seed = seed;
  if (runs > 0) cfg.runs = runs;
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (!scheme.empty()) cfg.scheme = scheme;
  cfg.validate();
  auto results = run_many(cfg);
  emit_outputs(results, cfg);
  double se = 0.0;
  for (const auto& r : results) se += r.result.mean_sum_se;
  se /= results.size();
  std::cout << "scheme " << cfg.scheme << ": " << results.size() << " run(s), mean sum SE "
            << se << " bits/s/Hz; outputs in " << cfg.out_dir << "\n";
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& param,
              const std::string& values_csv, const std::string& out_dir) {
  SimConfig base = load_or_default(config_path);
  if (!out_dir.empty()) base.out_dir = out_dir;
  std::vector<std::string> values;
  std::stringstream vs(values_csv);
  std::string tok;
  while (std::getline(vs, tok, ',')) values.push_back(tok);
  if (values.empty()) throw std::runtime_error("sweep: empty value list");

  std::filesystem::create_directories(base.out_dir);
  std::ofstream table(std::filesystem::path(base.out_dir) / "sweep.csv");
  table << param << ",mean_sum_se\n";
  for (const std::string& v : values) {
    // round-trip through the config text so any scalar key is sweepable
    std::ostringstream text;
    write_config(base, text);
    std::istringstream in(text.str());
    std::ostringstream patched;
    std::string line;
    bool hit = false;
    while (std::getline(in, line)) {
      if (line.rfind(param + " =", 0) == 0) {
        patched << param << " = " << v << "\n";
        hit = true;
      } else {
        patched << line << "\n";
      }
    }
    if (!hit) throw std::runtime_error("sweep: unknown parameter " + param);
    std::istringstream pin(patched.str());
    SimConfig cfg = parse_config(pin);
    cfg.out_dir = (std::filesystem::path(base.out_dir) / (param + "_" + v)).string();
    cfg.validate();
    auto results = run_many(cfg);
    emit_outputs(results, cfg);
    double se = 0.0;
    for (const auto& r : results) se += r.result.mean_sum_se;
    se /= results.size();
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s,%.12g\n", v.c_str(), se);
    table << buf;
    std::cout << param << " = " << v << ": mean sum SE " << se << "\n";
  }
  std::cout << "sweep table: " << (std::filesystem::path(base.out_dir) / "sweep.csv").string()
            << "\n";
  return 0;
}

std::pair<ArrayGeometry, ElementPattern> array_from_config(const SimConfig& cfg, char side) {
  ElementPattern pattern(cfg.delta_alpha, cfg.delta_beta);
  if (side == 'r')
    return {ArrayGeometry::cylindrical(cfg.m_r, cfg.n_r, cfg.r_cyl, cfg.lambda_c), pattern};
  return {ArrayGeometry::cylindrical(cfg.m_t, cfg.n_t, cfg.r_cyl, cfg.lambda_c), pattern};
}

int cmd_codebook_build(const std::string& config_path, const std::string& side,
                       const std::string& out_path) {
  SimConfig cfg = load_or_default(config_path);
  auto [geom, pattern] = array_from_config(cfg, side == "r" ? 'r' : 't');
  Codebook cb = Codebook::build_default(geom, pattern);
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  export_codebook(cb, out);
  size_t n_codewords = 0;
  for (const auto& [id, layer] : cb.layers()) n_codewords += layer.codewords.size();
  std::cout << "codebook: " << cb.layers().size() << " layers, " << n_codewords
            << " codewords -> " << out_path << "\n";
  return 0;
}

int cmd_codebook_inspect(const std::string& in_path) {
  std::ifstream in(in_path);
  if (!in) throw std::runtime_error("cannot open " + in_path);
  Codebook cb = import_codebook(in);
  const ArrayGeometry& g = cb.geometry();
  std::cout << "array: " << (g.kind == ArrayKind::Cylindrical ? "cylindrical" : "planar") << " "
            << g.m_count << " x " << g.n_count << ", lambda_c " << g.lambda_c << " m\n";
  for (const auto& [id, layer] : cb.layers()) {
    std::cout << "layer (" << id.m_s << ", " << id.n_s << "): I=" << layer.i_count
              << " J=" << layer.j_count << " bw_a=" << rad2deg(layer.bw_a)
              << " deg bw_e=" << rad2deg(layer.bw_e) << " deg\n";
  }
  return 0;
}

int cmd_codebook_pattern(const std::string& config_path, const std::string& layer_spec,
                         int samples, const std::string& side, const std::string& out_path) {
  SimConfig cfg = load_or_default(config_path);
  auto comma = layer_spec.find(',');
  if (comma == std::string::npos) throw std::runtime_error("--layer expects m_s,n_s");
  int m_s = std::stoi(layer_spec.substr(0, comma));
  int n_s = std::stoi(layer_spec.substr(comma + 1));
  auto [geom, pattern] = array_from_config(cfg, side == "r" ? 'r' : 't');
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  export_layer_pattern(geom, pattern, m_s, n_s, samples, out);
  std::cout << "layer (" << m_s << ", " << n_s << ") pattern -> " << out_path << "\n";
  return 0;
}

int cmd_latency(const std::string& config_path, std::uint64_t seed) {
  SimConfig cfg = load_or_default(config_path);
  if (seed != 0) cfg.seed = seed;
  cfg.validate();
  RunResult r = run_scenario(cfg);
  LatencyReport lat =
      latency_estimate(cfg, r.mean_rate_bps, r.max_distance, r.t_local_e, r.t_local_t);
  auto ms = [](double s) { return s * 1e3; };
  std::printf("latency model (%s, %d t-UAV(s), T = %d)\n", cfg.scheme.c_str(), cfg.k,
              cfg.t_slots_per_exchange);
  std::printf("  t_MSI     %10.4f ms\n", ms(lat.t_msi));
  std::printf("  t_tra     %10.4f ms  (mean rate %.3g bit/s)\n", ms(lat.t_tra), r.mean_rate_bps);
  std::printf("  t_pro     %10.6f ms  (max distance %.1f m)\n", ms(lat.t_pro), r.max_distance);
  std::printf("  t_local,e %10.4f ms  (measured)\n", ms(lat.t_local_e));
  std::printf("  t_local,t %10.4f ms  (measured)\n", ms(lat.t_local_t));
  std::printf("  t_total,e %10.4f ms\n", ms(lat.t_total_e));
  std::printf("  t_total,t %10.4f ms\n", ms(lat.t_total_t));
  std::printf("  t_ave     %10.4f ms %s\n", ms(lat.t_ave),
              lat.t_ave < 4e-3 ? "(< 4 ms)" : "(exceeds 4 ms on this host)");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conformal-array beam tracking simulator for UAV mmWave networks"};
  app.require_subcommand(1);

  std::string config_path, out_dir, scheme, param, values, layer_spec = "16,21", side = "t";
  std::string in_path, out_path;
  std::uint64_t seed = 0;
  int runs = 0, samples = 720;

  CLI::App* run = app.add_subcommand("run", "run a scenario and emit CSV metrics");
  run->add_option("--config", config_path, "config file (key = value)");
  run->add_option("--seed", seed, "master seed (overrides config)");
  run->add_option("--runs", runs, "Monte-Carlo run count (overrides config)");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--scheme", scheme, "scheme (overrides config)");

  CLI::App* sweep = app.add_subcommand("sweep", "sweep one config parameter");
  sweep->add_option("--config", config_path, "config file");
  sweep->add_option("--param", param, "config key to sweep")->required();
  sweep->add_option("--values", values, "comma-separated values")->required();
  sweep->add_option("--out", out_dir, "output directory");

  CLI::App* codebook = app.add_subcommand("codebook", "build / inspect / export codebooks");
  CLI::App* cb_build = codebook->add_subcommand("build", "build and export a codebook");
  cb_build->alias("export");
  cb_build->add_option("--config", config_path, "config file");
  cb_build->add_option("--array", side, "t or r array (default t)");
  cb_build->add_option("--out", out_path, "output file")->required();
  CLI::App* cb_inspect = codebook->add_subcommand("inspect", "summarize an exported codebook");
  cb_inspect->add_option("--in", in_path, "codebook file")->required();
  CLI::App* cb_pattern = codebook->add_subcommand("pattern", "emit polar beam-pattern table");
  cb_pattern->add_option("--config", config_path, "config file");
  cb_pattern->add_option("--layer", layer_spec, "layer as m_s,n_s (default 16,21)");
  cb_pattern->add_option("--samples", samples, "azimuth samples (default 720)");
  cb_pattern->add_option("--array", side, "t or r array (default t)");
  cb_pattern->add_option("--out", out_path, "output file")->required();

  CLI::App* latency = app.add_subcommand("latency", "run once and report frame latency");
  latency->add_option("--config", config_path, "config file");
  latency->add_option("--seed", seed, "master seed (overrides config)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, seed, runs, out_dir, scheme);
    if (sweep->parsed()) return cmd_sweep(config_path, param, values, out_dir);
    if (codebook->parsed()) {
      if (cb_build->parsed()) return cmd_codebook_build(config_path, side, out_path);
      if (cb_inspect->parsed()) return cmd_codebook_inspect(in_path);
      if (cb_pattern->parsed())
        return cmd_codebook_pattern(config_path, layer_spec, samples, side, out_path);
      std::cerr << "codebook: expected build / inspect / pattern\n";
      return 2;
    }
    if (latency->parsed()) return cmd_latency(config_path, seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
