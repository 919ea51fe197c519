#include "trapmodes/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "trapmodes/errors.hpp"

namespace trapmodes {

namespace {

using nlohmann::json;

[[noreturn]] void violation(const std::string& what) { throw SpecError("config: " + what); }

void only_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) violation("unknown key '" + key + "' in " + where);
}

double number(const json& obj, const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) violation("'" + key + "' must be a number");
  return v.get<double>();
}

int integer(const json& obj, const std::string& key, int fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (v.is_number_integer()) return v.get<int>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d == static_cast<double>(static_cast<long long>(d))) return static_cast<int>(d);
  }
  violation("'" + key + "' must be an integer");
}

std::string text(const json& obj, const std::string& key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_string()) violation("'" + key + "' must be a string");
  return obj.at(key).get<std::string>();
}

GapProfile parse_profile(const json& doc) {
  if (doc.is_string()) {
    const auto kind = doc.get<std::string>();
    if (kind == "zero") return GapProfile::zero();
    violation("profile '" + kind + "' needs an object with an amplitude or values");
  }
  if (!doc.is_object()) violation("profile must be a string or an object");
  only_keys(doc, {"kind", "amplitude", "values"}, "profile");
  const std::string kind = text(doc, "kind", "");
  if (kind == "zero") return GapProfile::zero();
  if (kind == "parabolic" || kind == "cosine") {
    if (!doc.contains("amplitude")) violation("profile '" + kind + "' requires an amplitude");
    const double c = number(doc, "amplitude", 0.0);
    if (!(c >= 0.0 && c < 1.0)) {
      std::ostringstream os;
      os << "profile amplitude " << c << " outside [0, 1)";
      violation(os.str());
    }
    return kind == "parabolic" ? GapProfile::parabolic(c) : GapProfile::cosine(c);
  }
  if (kind == "samples") {
    if (!doc.contains("values") || !doc.at("values").is_array())
      violation("profile 'samples' requires a values array");
    std::vector<double> vals;
    for (const auto& v : doc.at("values")) {
      if (!v.is_number()) violation("profile values must be numbers");
      vals.push_back(v.get<double>());
    }
    return GapProfile::samples(std::move(vals));
  }
  violation("profile kind must be zero, parabolic, cosine or samples");
}

WallBc parse_bc(const std::string& s) {
  if (s == "Neumann") return WallBc::Neumann;
  if (s == "Dirichlet") return WallBc::Dirichlet;
  violation("wall_bc must be Neumann or Dirichlet");
}

Variant parse_variant(const std::string& s) {
  if (s == "CenteredObstacles") return Variant::CenteredObstacles;
  if (s == "MidlineSegments") return Variant::MidlineSegments;
  if (s == "Open") return Variant::Open;
  violation("variant must be CenteredObstacles, MidlineSegments or Open");
}

Truncation parse_truncation(const std::string& s) {
  if (s == "Transparent") return Truncation::Transparent;
  if (s == "Dirichlet") return Truncation::Dirichlet;
  if (s == "Neumann") return Truncation::Neumann;
  violation("grid truncation must be Transparent, Dirichlet or Neumann");
}

WaveguideSpec build_spec(const json& doc) {
  if (!doc.contains("n")) violation("missing required key 'n'");
  const int n = integer(doc, "n", 0);
  const double a = number(doc, "a", 1.0);
  const GapProfile profile = doc.contains("profile") ? parse_profile(doc.at("profile")) : GapProfile::zero();
  const WallBc bc = parse_bc(text(doc, "wall_bc", "Neumann"));
  const Variant variant = parse_variant(text(doc, "variant", "CenteredObstacles"));
  try {
    return WaveguideSpec(n, a, profile, bc, variant);
  } catch (const std::exception& e) {
    violation(e.what());
  }
}

}  // namespace

json to_json(const GapProfile& profile) {
  json j;
  switch (profile.kind()) {
    case GapProfile::Kind::Zero: j["kind"] = "zero"; break;
    case GapProfile::Kind::Parabolic:
      j["kind"] = "parabolic";
      j["amplitude"] = profile.amplitude();
      break;
    case GapProfile::Kind::Cosine:
      j["kind"] = "cosine";
      j["amplitude"] = profile.amplitude();
      break;
    case GapProfile::Kind::Samples:
      j["kind"] = "samples";
      j["values"] = profile.values();
      break;
  }
  return j;
}

json to_json(const WaveguideSpec& spec) {
  return {{"variant", to_string(spec.variant())},
          {"wall_bc", to_string(spec.wall_bc())},
          {"n", spec.n()},
          {"a", spec.a()},
          {"profile", to_json(spec.profile())}};
}

json to_json(const GridSpec& grid) {
  return {{"hx", grid.hx}, {"hy", grid.hy}, {"l", grid.l}, {"truncation", to_string(grid.truncation)}};
}

void renormalize(RunConfig& cfg) {
  cfg.normalized = to_json(cfg.spec);
  cfg.normalized["grid"] = to_json(cfg.grid);
  cfg.normalized["budget"] = cfg.budget;
  cfg.normalized["k"] = cfg.k;
}

RunConfig parse_config(const json& doc) {
  if (!doc.is_object()) violation("top level must be an object");
  only_keys(doc, {"variant", "wall_bc", "n", "a", "profile", "budget", "grid", "k"}, "config");
  RunConfig cfg{build_spec(doc), GridSpec{}, 2000, 2, {}};
  cfg.budget = integer(doc, "budget", 2000);
  if (cfg.budget < 1) violation("budget must be at least 1");
  cfg.k = integer(doc, "k", 2);
  if (cfg.k < 1) violation("k must be at least 1");
  if (doc.contains("grid")) {
    const json& g = doc.at("grid");
    if (!g.is_object()) violation("grid must be an object");
    only_keys(g, {"hx", "hy", "l", "truncation"}, "grid");
    cfg.grid.hx = number(g, "hx", cfg.grid.hx);
    cfg.grid.hy = number(g, "hy", cfg.grid.hy);
    cfg.grid.l = number(g, "l", cfg.grid.l);
    cfg.grid.truncation = parse_truncation(text(g, "truncation", "Transparent"));
    if (!(cfg.grid.hx > 0.0 && cfg.grid.hy > 0.0 && cfg.grid.l > 0.0))
      violation("grid hx, hy and l must be positive");
  }
  renormalize(cfg);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) violation("cannot read '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    violation(std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc);
}

}  // namespace trapmodes
