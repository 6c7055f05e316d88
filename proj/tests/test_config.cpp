#include <doctest.h>

#include <nlohmann/json.hpp>

#include <sstream>

#include "d2d/config.hpp"

using namespace d2d;

namespace {

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::string field_of(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<accepted>";
}

const char* kFull = R"(# every key
lambda_m = 1e-6
lambda_d = 6e-5
d = 50
alpha = 4
beta_db = 5
gamma_db = 0
p_c_mw = 100
p_d_mw = 0.1
cell_area_shape = 3.5
mu = 0.3
window_m = 4000
topology = bounded
n_realizations = 123
seed = 99
threads = 2
refresh_fading = true
rate_ceiling = 25
ccdf_db = -10, 0, 7.5
tune_realizations = 50
scheme.kind = channel_aware
scheme.delta_m = 180.5
scheme.p_s = 0.4
scheme.tune = false
)";

}  // namespace

TEST_SUITE("config") {

TEST_CASE("defaults from an empty file") {
  const RunConfig c = parse("# nothing\n\n");
  CHECK(c.experiment.system == SystemParams{});
  CHECK(c.beta_db == 5.0);
  CHECK(c.experiment.system.beta == doctest::Approx(3.1622776601683795));
  CHECK(c.experiment.system.gamma == 1.0);
  CHECK(c.constraint.gamma == 1.0);
  CHECK(c.tune_scheme);
}

TEST_CASE("every key is read") {
  const RunConfig c = parse(kFull);
  const auto& e = c.experiment;
  CHECK(e.system.lambda_d == 6e-5);
  CHECK(e.system.cell_area_shape == 3.5);
  CHECK(e.system.p_c == 100.0);
  CHECK(e.system.p_d == 0.1);
  CHECK(c.constraint.mu == 0.3);
  CHECK(e.window.width == 4000.0);
  CHECK(e.window.height == 4000.0);
  CHECK(e.window.topology == Topology::bounded);
  CHECK(e.n_realizations == 123);
  CHECK(e.seed == 99);
  CHECK(e.threads == 2);
  CHECK(e.refresh_fading_between_phases);
  CHECK(e.rate_ceiling == 25.0);
  CHECK(e.ccdf_db == std::vector<double>{-10.0, 0.0, 7.5});
  CHECK(e.collect_sir_samples);
  CHECK(c.tune_realizations == 50);
  CHECK(e.scheme.kind == SchemeKind::channel_aware);
  CHECK(e.scheme.delta == 180.5);
  CHECK(*e.scheme.access_fraction == 0.4);
  CHECK_FALSE(c.tune_scheme);
}

TEST_CASE("dB thresholds convert to linear") {
  const RunConfig c = parse("beta_db = 10\ngamma_db = -3\nscheme.g_db = 3\nscheme.delta_m = 100\n");
  CHECK(c.experiment.system.beta == doctest::Approx(10.0).epsilon(1e-14));
  CHECK(c.experiment.system.gamma == doctest::Approx(0.5011872336272722).epsilon(1e-14));
  CHECK(c.constraint.gamma == c.experiment.system.gamma);
  CHECK(*c.experiment.scheme.sir_threshold == doctest::Approx(1.9952623149688795).epsilon(1e-14));
}

TEST_CASE("parse, serialize, parse is a fixed point") {
  for (const char* text :
       {kFull, "", "lambda_d = 1.2345678901234567e-5\nscheme.g_db = -0.59063\nscheme.tune = false\n",
        "scheme.kind = channel_aware\nscheme.g_min = 1.5\nscheme.tune = false\n"}) {
    const RunConfig a = parse(text);
    const std::string once = serialize_config(a);
    const RunConfig b = parse(once);
    CHECK(a == b);
    CHECK(serialize_config(b) == once);
  }
}

TEST_CASE("errors name the offending field") {
  CHECK(field_of("speed = 3\n") == "speed");
  CHECK(field_of("d = 50\nd = 60\n") == "d");
  CHECK(field_of("lambda_d = lots\n") == "lambda_d");
  CHECK(field_of("lambda_d = 1e-5x\n") == "lambda_d");
  CHECK(field_of("lambda_d = -1\n") == "lambda_d");
  CHECK(field_of("lambda_m = 0\n") == "lambda_m");
  CHECK(field_of("alpha = 2\n") == "alpha");
  CHECK(field_of("mu = 1.5\n") == "mu");
  CHECK(field_of("n_realizations = 0\n") == "n_realizations");
  CHECK(field_of("n_realizations = -4\n") == "n_realizations");
  CHECK(field_of("topology = sphere\n") == "topology");
  CHECK(field_of("refresh_fading = maybe\n") == "refresh_fading");
  CHECK(field_of("ccdf_db = 3, 1\n") == "ccdf_db");
  CHECK(field_of("scheme.kind = magic\n") == "scheme.kind");
  CHECK(field_of("scheme.p_s = 1.2\n") == "scheme.p_s");
  CHECK(field_of("window_m = 80\n") == "window_m");
  CHECK(field_of("just some words\n") == "line 1");
  CHECK(field_of("scheme.kind = proposed_threshold\nscheme.tune = false\n") == "scheme.kind");
  CHECK(field_of("scheme.kind = proposed_threshold\nscheme.tune = true\n") == "<accepted>");
  CHECK_THROWS_AS(load_config("/nonexistent/run.cfg"), ConfigError);
}

TEST_CASE("git blob hash") {
  // `printf '' | git hash-object --stdin` and `echo hello | git hash-object --stdin`.
  CHECK(git_blob_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  CHECK(git_blob_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
  const RunConfig c = parse(kFull);
  CHECK(git_blob_hash(serialize_config(c)) == git_blob_hash(serialize_config(parse(kFull))));
  RunConfig other = c;
  other.experiment.seed = 100;
  CHECK(git_blob_hash(serialize_config(other)) != git_blob_hash(serialize_config(c)));
}

TEST_CASE("manifest JSON") {
  const RunConfig c = parse("scheme.g_db = -0.5\n");
  RunManifest m{"run.cfg", "simulate", "out", {"report.json", "manifest.json"}, "abc", 1.5};
  std::ostringstream out;
  write_manifest_json(out, m, c);
  const auto j = nlohmann::json::parse(out.str());
  CHECK(j["subcommand"] == "simulate");
  CHECK(j["files"].size() == 2);
  CHECK(j["seed"] == 1);
  CHECK(j["beta_db"] == 5.0);
  CHECK(j["gamma_linear"] == 1.0);
  CHECK(j["g_linear"].get<double>() == doctest::Approx(0.8912509381337456));
}

}
