#include "d2d/config.hpp"

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

namespace d2d {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

class Entries {
public:
  explicit Entries(std::map<std::string, std::string> kv) : kv_(std::move(kv)) {}

  std::optional<std::string> take(const std::string& key) {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return std::nullopt;
    std::string v = it->second;
    kv_.erase(it);
    return v;
  }

  void number(const std::string& key, double& out) {
    if (auto v = take(key)) out = to_double(key, *v);
  }

  void optional_number(const std::string& key, std::optional<double>& out) {
    if (auto v = take(key)) out = to_double(key, *v);
  }

  template <class Int>
  void integer(const std::string& key, Int& out) {
    if (auto v = take(key)) {
      Int value{};
      const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), value);
      if (ec != std::errc() || ptr != v->data() + v->size())
        throw ConfigError(key, "expected a non-negative integer, got '" + *v + "'");
      out = value;
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (auto v = take(key)) {
      if (*v == "true" || *v == "1") out = true;
      else if (*v == "false" || *v == "0") out = false;
      else throw ConfigError(key, "expected true or false, got '" + *v + "'");
    }
  }

  void number_list(const std::string& key, std::vector<double>& out) {
    if (auto v = take(key)) {
      out.clear();
      std::stringstream ss(*v);
      std::string item;
      while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
    }
  }

  void reject_leftovers() const {
    if (!kv_.empty()) throw ConfigError(kv_.begin()->first, "unknown key");
  }

  static double to_double(const std::string& key, const std::string& v) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), value);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(value))
      throw ConfigError(key, "expected a finite number, got '" + v + "'");
    return value;
  }

private:
  std::map<std::string, std::string> kv_;
};

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return s.str();
}

// Re-throws parameter validation failures under the config key they stem from.
template <class F>
void check(const std::string& field, F&& f) {
  try {
    f();
  } catch (const ConfigError&) {
    throw;
  } catch (const ParameterError& e) {
    throw ConfigError(field, e.what());
  }
}

}  // namespace

void RunConfig::validate() const {
  const auto& s = experiment.system;
  if (!(s.lambda_m > 0.0)) throw ConfigError("lambda_m", "must be positive");
  if (!(s.lambda_d >= 0.0)) throw ConfigError("lambda_d", "must be >= 0");
  if (!(s.d > 0.0)) throw ConfigError("d", "must be positive");
  if (!(s.alpha > 2.0)) throw ConfigError("alpha", "must exceed 2");
  if (!(s.p_c > 0.0)) throw ConfigError("p_c_mw", "must be positive");
  if (!(s.p_d > 0.0)) throw ConfigError("p_d_mw", "must be positive");
  if (!(s.cell_area_shape > 0.0)) throw ConfigError("cell_area_shape", "must be positive");
  if (!(constraint.mu >= 0.0 && constraint.mu <= 1.0)) throw ConfigError("mu", "must lie in [0,1]");
  const auto& w = experiment.window;
  if (!(w.width > 0.0) || w.width != w.height) throw ConfigError("window_m", "must be positive");
  if (2.0 * s.d > w.width) throw ConfigError("window_m", "must be at least twice the link length");
  if (experiment.n_realizations < 1) throw ConfigError("n_realizations", "must be >= 1");
  if (!(experiment.rate_ceiling > 0.0)) throw ConfigError("rate_ceiling", "must be positive");
  if (!std::is_sorted(experiment.ccdf_db.begin(), experiment.ccdf_db.end()))
    throw ConfigError("ccdf_db", "must be sorted");
  if (tune_realizations < 1) throw ConfigError("tune_realizations", "must be >= 1");
  const auto& sc = experiment.scheme;
  if (!(sc.delta >= 0.0)) throw ConfigError("scheme.delta_m", "must be >= 0");
  if (sc.access_fraction && !(*sc.access_fraction >= 0.0 && *sc.access_fraction <= 1.0))
    throw ConfigError("scheme.p_s", "must lie in [0,1]");
  if (!tune_scheme) check("scheme.kind", [&] { sc.validate(); });
  // A tuned scheme is filled in later; only the rest is checked here.
  ExperimentConfig rest = experiment;
  rest.scheme = SchemeSpec{SchemeKind::guard_zone_only};
  check("scheme.kind", [&] { rest.validate(); });
}

bool operator==(const RunConfig& a, const RunConfig& b) {
  const auto& x = a.experiment;
  const auto& y = b.experiment;
  return x.system == y.system && x.scheme == y.scheme && x.window == y.window &&
         x.n_realizations == y.n_realizations && x.seed == y.seed && x.threads == y.threads &&
         x.refresh_fading_between_phases == y.refresh_fading_between_phases &&
         x.rate_ceiling == y.rate_ceiling && x.collect_sir_samples == y.collect_sir_samples &&
         x.ccdf_db == y.ccdf_db && a.constraint.mu == b.constraint.mu &&
         a.constraint.gamma == b.constraint.gamma && a.beta_db == b.beta_db &&
         a.gamma_db == b.gamma_db && a.g_db == b.g_db && a.tune_scheme == b.tune_scheme &&
         a.tune_realizations == b.tune_realizations;
}

RunConfig parse_config(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno), "expected key = value");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno), "empty key");
    if (!kv.emplace(key, value).second) throw ConfigError(key, "given more than once");
  }

  RunConfig c;
  auto& e = c.experiment;
  auto& s = e.system;
  Entries in_kv(std::move(kv));
  in_kv.number("lambda_m", s.lambda_m);
  in_kv.number("lambda_d", s.lambda_d);
  in_kv.number("d", s.d);
  in_kv.number("alpha", s.alpha);
  in_kv.number("beta_db", c.beta_db);
  in_kv.number("gamma_db", c.gamma_db);
  in_kv.number("p_c_mw", s.p_c);
  in_kv.number("p_d_mw", s.p_d);
  in_kv.number("cell_area_shape", s.cell_area_shape);
  in_kv.number("mu", c.constraint.mu);
  double side = e.window.width;
  in_kv.number("window_m", side);
  e.window.width = e.window.height = side;
  if (auto topo = in_kv.take("topology")) {
    if (*topo == "torus") e.window.topology = Topology::torus;
    else if (*topo == "bounded") e.window.topology = Topology::bounded;
    else throw ConfigError("topology", "expected torus or bounded, got '" + *topo + "'");
  }
  in_kv.integer("n_realizations", e.n_realizations);
  in_kv.integer("seed", e.seed);
  in_kv.integer("threads", e.threads);
  in_kv.boolean("refresh_fading", e.refresh_fading_between_phases);
  in_kv.number("rate_ceiling", e.rate_ceiling);
  in_kv.number_list("ccdf_db", e.ccdf_db);
  e.collect_sir_samples = !e.ccdf_db.empty();
  in_kv.integer("tune_realizations", c.tune_realizations);

  if (auto kind = in_kv.take("scheme.kind")) {
    try {
      e.scheme.kind = scheme_kind_from_string(*kind);
    } catch (const ParameterError& err) {
      throw ConfigError("scheme.kind", err.what());
    }
  }
  in_kv.number("scheme.delta_m", e.scheme.delta);
  in_kv.optional_number("scheme.g_db", c.g_db);
  in_kv.optional_number("scheme.p_s", e.scheme.access_fraction);
  in_kv.optional_number("scheme.g_min", e.scheme.gain_threshold);
  in_kv.boolean("scheme.tune", c.tune_scheme);
  in_kv.reject_leftovers();

  s.beta = db_to_linear(c.beta_db);
  s.gamma = db_to_linear(c.gamma_db);
  c.constraint.gamma = s.gamma;
  if (c.g_db) e.scheme.sir_threshold = db_to_linear(*c.g_db);
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config", "cannot open '" + path + "'");
  return parse_config(f);
}

std::string serialize_config(const RunConfig& c) {
  const auto& e = c.experiment;
  const auto& s = e.system;
  std::ostringstream out;
  out << "lambda_m = " << fmt(s.lambda_m) << '\n'
      << "lambda_d = " << fmt(s.lambda_d) << '\n'
      << "d = " << fmt(s.d) << '\n'
      << "alpha = " << fmt(s.alpha) << '\n'
      << "beta_db = " << fmt(c.beta_db) << '\n'
      << "gamma_db = " << fmt(c.gamma_db) << '\n'
      << "p_c_mw = " << fmt(s.p_c) << '\n'
      << "p_d_mw = " << fmt(s.p_d) << '\n'
      << "cell_area_shape = " << fmt(s.cell_area_shape) << '\n'
      << "mu = " << fmt(c.constraint.mu) << '\n'
      << "window_m = " << fmt(e.window.width) << '\n'
      << "topology = " << (e.window.topology == Topology::torus ? "torus" : "bounded") << '\n'
      << "n_realizations = " << e.n_realizations << '\n'
      << "seed = " << e.seed << '\n'
      << "threads = " << e.threads << '\n'
      << "refresh_fading = " << (e.refresh_fading_between_phases ? "true" : "false") << '\n'
      << "rate_ceiling = " << fmt(e.rate_ceiling) << '\n';
  if (!e.ccdf_db.empty()) {
    out << "ccdf_db = ";
    for (std::size_t i = 0; i < e.ccdf_db.size(); ++i) out << (i ? "," : "") << fmt(e.ccdf_db[i]);
    out << '\n';
  }
  out << "tune_realizations = " << c.tune_realizations << '\n'
      << "scheme.kind = " << to_string(e.scheme.kind) << '\n'
      << "scheme.delta_m = " << fmt(e.scheme.delta) << '\n'
      << "scheme.tune = " << (c.tune_scheme ? "true" : "false") << '\n';
  if (c.g_db) out << "scheme.g_db = " << fmt(*c.g_db) << '\n';
  if (e.scheme.access_fraction) out << "scheme.p_s = " << fmt(*e.scheme.access_fraction) << '\n';
  if (e.scheme.gain_threshold) out << "scheme.g_min = " << fmt(*e.scheme.gain_threshold) << '\n';
  return out.str();
}

std::string git_blob_hash(const std::string& text) {
  const std::string header = "blob " + std::to_string(text.size()) + '\0';
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr) throw std::runtime_error("EVP_MD_CTX_new failed");
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                  EVP_DigestUpdate(ctx, text.data(), text.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, digest, &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw std::runtime_error("SHA-1 digest failed");
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i)
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return hex.str();
}

void write_manifest_json(std::ostream& out, const RunManifest& m, const RunConfig& c) {
  nlohmann::json j;
  j["config_path"] = m.config_path;
  j["subcommand"] = m.subcommand;
  j["output_dir"] = m.output_dir;
  j["files"] = m.files;
  j["config_hash"] = m.config_hash;
  j["duration_s"] = m.duration_s;
  j["seed"] = c.experiment.seed;
  j["beta_db"] = c.beta_db;
  j["beta_linear"] = c.experiment.system.beta;
  j["gamma_db"] = c.gamma_db;
  j["gamma_linear"] = c.experiment.system.gamma;
  if (c.g_db) {
    j["g_db"] = *c.g_db;
    j["g_linear"] = db_to_linear(*c.g_db);
  }
  out << j.dump(2) << '\n';
}

}  // namespace d2d
