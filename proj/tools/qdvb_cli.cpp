#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qdvb.h"

namespace {

int to_exit(int rc) {
  if (rc == QDVB_OK) return 0;
  if (rc == QDVB_ERR_VALIDATION) return 2;
  return 3;
}

int report_failure(int rc) {
  std::fprintf(stderr, "error: %s\n", qdvb_last_error());
  return to_exit(rc);
}

struct ConfigHandle {
  qdvb_config* c = nullptr;
  ~ConfigHandle() { qdvb_config_free(c); }
};

struct ReportHandle {
  qdvb_report* r = nullptr;
  ~ReportHandle() { qdvb_report_free(r); }
};

int cmd_bmean(double alpha_p, double omega_b, const std::vector<double>& temps) {
  std::printf("%8s  %-16s\n", "T_K", "B_mean");
  for (double t : temps) {
    int enabled = t > 0.0 ? 1 : 0;  // the T = 0 row reports the bath-off limit
    double b = 0.0;
    if (int rc = qdvb_bmean(alpha_p, omega_b, t, enabled, &b)) return report_failure(rc);
    std::printf("%8.1f  %.12f%s\n", t, b, enabled ? "" : "  (bath off)");
  }
  return 0;
}

int cmd_run(const std::string& preset, const std::string& config_file,
            const std::string& out_dir, int threads, int grid_n, int steps,
            const std::vector<std::string>& sets) {
  ConfigHandle cfg;
  int rc = preset.empty() ? qdvb_config_parse_file(config_file.c_str(), &cfg.c)
                          : qdvb_config_from_preset(preset.c_str(), &cfg.c);
  if (rc) return report_failure(rc);

  auto set = [&](const char* key, const std::string& value) {
    return qdvb_config_set(cfg.c, key, value.c_str());
  };
  if (!out_dir.empty())
    if ((rc = set("output.directory", out_dir))) return report_failure(rc);
  if (threads > 0)
    if ((rc = set("propagation.threads", std::to_string(threads)))) return report_failure(rc);
  if (grid_n > 0) {
    if ((rc = set("grid.nx", std::to_string(grid_n)))) return report_failure(rc);
    if ((rc = set("grid.ny", std::to_string(grid_n)))) return report_failure(rc);
  }
  if (steps > 0)
    if ((rc = set("propagation.n_steps", std::to_string(steps)))) return report_failure(rc);
  for (const std::string& kv : sets) {
    size_t eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error: --set expects section.key=value, got '%s'\n",
                   kv.c_str());
      return 2;
    }
    if ((rc = qdvb_config_set(cfg.c, kv.substr(0, eq).c_str(),
                              kv.substr(eq + 1).c_str())))
      return report_failure(rc);
  }

  ReportHandle rep;
  if ((rc = qdvb_run(cfg.c, &rep.r))) return report_failure(rc);
  char* text = nullptr;
  if ((rc = qdvb_report_summary(rep.r, &text))) return report_failure(rc);
  std::fputs(text, stdout);
  qdvb_string_free(text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vector-beam generation in a phonon-coupled quantum-dot medium"};
  app.require_subcommand(1);

  auto* bmean = app.add_subcommand("bmean", "print the <B> vs temperature table");
  double alpha_p = 1.42e-3, omega_b = 10.0;
  std::vector<double> temps{0.0, 5.0, 10.0, 20.0};
  bmean->add_option("--alpha-p", alpha_p, "bath coupling, 1/gamma_n^2");
  bmean->add_option("--omega-b", omega_b, "bath cutoff, gamma_n");
  bmean->add_option("--temps", temps, "temperatures in K (0 means bath off)")
      ->delimiter(',');

  auto* run = app.add_subcommand("run", "execute one scenario");
  std::string preset, config_file, out_dir;
  int threads = 0, grid_n = 0, steps = 0;
  std::vector<std::string> sets;
  auto* popt = run->add_option("--preset", preset, "figure preset name");
  run->add_option("--config", config_file, "scenario config file")->excludes(popt);
  run->add_option("--out", out_dir, "override the output directory");
  run->add_option("--threads", threads, "worker count for per-pixel parallelism");
  run->add_option("--grid", grid_n, "override grid to N x N points");
  run->add_option("--steps", steps, "override the z~ step count");
  run->add_option("--set", sets, "override one key, section.key=value")
      ->take_all();

  auto* render = app.add_subcommand("render", "rebuild images for a run directory");
  std::string from_dir;
  render->add_option("--from", from_dir, "existing run directory")->required();

  auto* presets = app.add_subcommand("presets", "list figure presets");
  bool list_flag = false;
  presets->add_flag("--list", list_flag, "list presets (default)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (app.got_subcommand(bmean)) return cmd_bmean(alpha_p, omega_b, temps);
  if (app.got_subcommand(run)) {
    if (preset.empty() == config_file.empty()) {
      std::fprintf(stderr, "error: run needs exactly one of --preset or --config\n");
      return 2;
    }
    return cmd_run(preset, config_file, out_dir, threads, grid_n, steps, sets);
  }
  if (app.got_subcommand(render)) {
    if (int rc = qdvb_render_dir(from_dir.c_str())) return report_failure(rc);
    std::printf("rendered %s\n", from_dir.c_str());
    return 0;
  }
  char* text = nullptr;
  if (int rc = qdvb_presets_list(&text)) return report_failure(rc);
  std::fputs(text, stdout);
  qdvb_string_free(text);
  return 0;
}
