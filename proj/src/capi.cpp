#include "qdvb.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "qdvb/errors.hpp"
#include "qdvb/scenario.hpp"

struct qdvb_config {
  qdvb::ScenarioConfig cfg;
};

struct qdvb_report {
  qdvb::RunReport rep;
};

namespace {

thread_local std::string g_last_error = "ok";

int fail(int code, const char* what) {
  g_last_error = what;
  return code;
}

template <class F>
int guarded(F&& f) {
  try {
    f();
    return QDVB_OK;
  } catch (const qdvb::ValidationError& e) {
    return fail(QDVB_ERR_VALIDATION, e.what());
  } catch (const qdvb::NumericalError& e) {
    return fail(QDVB_ERR_NUMERICAL, e.what());
  } catch (const qdvb::IoError& e) {
    return fail(QDVB_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(QDVB_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(QDVB_ERR_INTERNAL, "unknown error");
  }
}

int copy_out(const std::string& s, char** out) {
  char* buf = static_cast<char*>(std::malloc(s.size() + 1));
  if (!buf) return fail(QDVB_ERR_INTERNAL, "out of memory");
  std::memcpy(buf, s.c_str(), s.size() + 1);
  *out = buf;
  return QDVB_OK;
}

int require(bool ok, const char* what) {
  return ok ? QDVB_OK : fail(QDVB_ERR_VALIDATION, what);
}

}  // namespace

extern "C" {

const char* qdvb_last_error(void) { return g_last_error.c_str(); }

int qdvb_config_from_preset(const char* name, qdvb_config** out) {
  if (int rc = require(name && out, "null argument")) return rc;
  return guarded([&] { *out = new qdvb_config{qdvb::ScenarioConfig::preset(name)}; });
}

int qdvb_config_parse_text(const char* text, qdvb_config** out) {
  if (int rc = require(text && out, "null argument")) return rc;
  return guarded([&] { *out = new qdvb_config{qdvb::ScenarioConfig::parse(text)}; });
}

int qdvb_config_parse_file(const char* path, qdvb_config** out) {
  if (int rc = require(path && out, "null argument")) return rc;
  return guarded(
      [&] { *out = new qdvb_config{qdvb::ScenarioConfig::parse_file(path)}; });
}

int qdvb_config_set(qdvb_config* config, const char* key, const char* value) {
  if (int rc = require(config && key && value, "null argument")) return rc;
  return guarded([&] { config->cfg.set(key, value); });
}

int qdvb_config_render(const qdvb_config* config, char** out_text) {
  if (int rc = require(config && out_text, "null argument")) return rc;
  std::string text;
  if (int rc = guarded([&] { text = config->cfg.render(); })) return rc;
  return copy_out(text, out_text);
}

void qdvb_config_free(qdvb_config* config) { delete config; }

int qdvb_run(const qdvb_config* config, qdvb_report** out) {
  if (int rc = require(config && out, "null argument")) return rc;
  return guarded([&] { *out = new qdvb_report{qdvb::run_scenario(config->cfg)}; });
}

int qdvb_report_json(const qdvb_report* report, int include_timings, char** out_json) {
  if (int rc = require(report && out_json, "null argument")) return rc;
  std::string text;
  if (int rc = guarded([&] { text = report->rep.to_json(include_timings != 0); }))
    return rc;
  return copy_out(text, out_json);
}

int qdvb_report_summary(const qdvb_report* report, char** out_text) {
  if (int rc = require(report && out_text, "null argument")) return rc;
  std::string text;
  if (int rc = guarded([&] { text = report->rep.summary(); })) return rc;
  return copy_out(text, out_text);
}

void qdvb_report_free(qdvb_report* report) { delete report; }

int qdvb_render_dir(const char* run_dir) {
  if (int rc = require(run_dir != nullptr, "null argument")) return rc;
  return guarded([&] { qdvb::render_run_dir(run_dir); });
}

int qdvb_bmean(double alpha_p_invgn2, double omega_b_gn, double temperature_K,
               int enabled, double* out) {
  if (int rc = require(out != nullptr, "null argument")) return rc;
  return guarded([&] {
    qdvb::PhononBath bath;
    bath.alpha_p = alpha_p_invgn2;
    bath.omega_b = omega_b_gn;
    bath.temperature_K = temperature_K;
    bath.enabled = enabled != 0;
    *out = qdvb::b_mean_value(bath);
  });
}

int qdvb_presets_list(char** out_text) {
  if (int rc = require(out_text != nullptr, "null argument")) return rc;
  std::string text;
  for (const auto& [name, desc] : qdvb::preset_catalog())
    text += name + ": " + desc + "\n";
  return copy_out(text, out_text);
}

void qdvb_string_free(char* s) { std::free(s); }

}  // extern "C"
