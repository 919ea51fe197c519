#include "trapmodes/workflow.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "trapmodes/errors.hpp"
#include "trapmodes/symmetry.hpp"
#include "trapmodes/testfun.hpp"
#include "trapmodes/variational.hpp"

namespace trapmodes {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

constexpr double kIdentityLimit = 1e-9;
constexpr double kSymmetryLimit = 1e-10;

class Csv {
 public:
  Csv(const fs::path& path, const std::vector<std::string>& header) : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    row(header);
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

std::string num(double v) { return format_number(v); }
std::string num(int v) { return std::to_string(v); }

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

json certificate_json(const BoundCertificate& c) {
  json j{{"m", c.m},
         {"threshold", c.threshold},
         {"q_star", c.q_star},
         {"margin", c.margin},
         {"valid", c.valid()},
         {"verified_by_quadrature", c.verified_by_quadrature},
         {"lambda", c.params.lambda},
         {"alpha", c.params.alpha},
         {"b", c.params.b},
         {"q_optimizer", c.q_optimizer},
         {"evaluations", c.evaluations}};
  j["q_closed_form"] = std::isnan(c.q_closed_form) ? json(nullptr) : json(c.q_closed_form);
  return j;
}

std::vector<std::string> spec_cells(const WaveguideSpec& s) {
  return {to_string(s.variant()), to_string(s.wall_bc()), num(s.n()), num(s.a()), s.profile().label()};
}

void write_field(const fs::path& path, const DiscreteOperator& op, const Eigen::VectorXd& u) {
  Csv csv(path, {"x", "y", "u_below", "u_above"});
  for (int i = 0; i < op.columns; ++i)
    for (int j = 0; j < op.rows; ++j) {
      const int id = op.at(i, j);
      const bool live = op.kind[id] == NodeKind::Regular || op.kind[id] == NodeKind::Slit;
      const double lo = live ? u[op.lower[id]] : 0.0;
      const double hi = live ? u[op.upper[id]] : 0.0;
      csv.row({num(op.x(i)), num(op.y(j)), num(lo), num(hi)});
    }
}

/// Minimal reader for the CSV files written above (no quoting is ever used).
std::vector<std::map<std::string, std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::map<std::string, std::string>> rows;
  std::string line;
  std::vector<std::string> header;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
  };
  if (!std::getline(in, line)) return rows;
  header = split(line);
  while (std::getline(in, line)) {
    const auto cells = split(line);
    std::map<std::string, std::string> r;
    for (std::size_t i = 0; i < header.size() && i < cells.size(); ++i) r[header[i]] = cells[i];
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace

CommandResult run_certify(const RunConfig& cfg, const fs::path& out) {
  fs::create_directories(out);
  CommandResult res;
  const auto certs = evaluate_all(cfg.spec, cfg.budget);
  json doc;
  doc["config"] = cfg.normalized;
  doc["quadrature_tolerance"] = kQuadratureTolerance;
  doc["certification_slack"] = 10.0 * kQuadratureTolerance;
  doc["admissible_classes"] = admissible_classes(cfg.spec);
  doc["certificates"] = json::array();
  Csv csv(out / "summary.csv", {"variant", "wall_bc", "N", "a", "profile", "m", "threshold", "q_star",
                                "margin", "lambda", "alpha", "b"});
  for (const auto& c : certs) {
    doc["certificates"].push_back(certificate_json(c));
    auto row = spec_cells(cfg.spec);
    for (const auto& v : {num(c.m), num(c.threshold), num(c.q_star), num(c.margin), num(c.params.lambda),
                          num(c.params.alpha), num(c.params.b)})
      row.push_back(v);
    csv.row(row);
    if (!c.valid()) {
      res.exit_code = 2;
      res.warnings.push_back(CertificationFailed(c.m, c.margin).what());
    }
  }
  if (certs.empty()) {
    const std::string notice = "no admissible symmetry class for this setting; nothing to certify";
    doc["notice"] = notice;
    res.notices.push_back(notice);
  }
  write_json(out / "certificates.json", doc);
  return res;
}

CommandResult run_solve(const RunConfig& cfg, const fs::path& out) {
  check_grid(cfg.spec, cfg.grid);
  fs::create_directories(out);
  CommandResult res;
  const WaveguideSpec& spec = cfg.spec;
  std::map<int, double> q_star;
  for (const auto& c : evaluate_all(spec, cfg.budget))
    if (c.valid()) q_star[c.m] = c.q_star;

  const SolveOutput sol = trapped_modes(spec, cfg.grid, cfg.k, true);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  Csv modes(out / "modes.csv", {"N", "variant", "wall_bc", "m", "mu", "threshold", "q_star", "fraction",
                                "decay_rate", "hx", "hy", "L"});
  Csv cands(out / "candidates.csv", {"m", "index", "classified_m", "mu", "mu_coarse", "threshold",
                                     "discrete_threshold", "error_estimate", "fraction", "decay_rate",
                                     "retained"});
  std::set<int> found;
  json fields = json::array();
  for (const auto& r : sol.modes) {
    cands.row({num(r.solved_class), num(r.index), num(r.m), num(r.mu), num(r.mu_coarse), num(r.threshold),
               num(r.discrete_threshold), num(r.error_estimate), num(r.class_energy_fraction),
               num(r.decay_rate), r.retained ? "1" : "0"});
    if (!r.retained) continue;
    const auto q = q_star.count(r.m) ? q_star.at(r.m) : nan;
    modes.row({num(spec.n()), to_string(spec.variant()), to_string(spec.wall_bc()), num(r.m), num(r.mu),
               num(r.threshold), num(q), num(r.class_energy_fraction), num(r.decay_rate), num(cfg.grid.hx),
               num(cfg.grid.hy), num(cfg.grid.l)});
    if (!std::isnan(q) && r.mu > q + r.error_estimate) {
      std::ostringstream os;
      os << "class " << r.m << ": mu " << r.mu << " exceeds q_star " << q << " by more than the error estimate";
      res.warnings.push_back(os.str());
    }
    if (r.index == 0) {
      const std::string name = "field_m" + std::to_string(r.m) + ".csv";
      write_field(out / name, sol.op, r.vector);
      fields.push_back(name);
    }
    found.insert(r.m);
  }

  json missing = json::array();
  for (const auto& [m, q] : q_star)
    if (!found.count(m)) {
      missing.push_back(m);
      res.exit_code = 2;
      res.warnings.push_back("certified class " + std::to_string(m) + " has no retained mode below threshold");
    }

  GridSpec coarse;
  json study = nullptr;
  if (coarsened(spec, cfg.grid, coarse)) {
    GridSpec longer = coarse;
    longer.l = cfg.grid.l + 4.0;
    const ConvergenceTable table = convergence_study(spec, {coarse, cfg.grid, longer}, cfg.k);
    Csv rows(out / "convergence.csv", {"m", "index", "hx", "hy", "L", "mu"});
    for (const auto& r : table.rows)
      rows.row({num(r.m), num(r.index), num(r.grid.hx), num(r.grid.hy), num(r.grid.l), num(r.mu)});
    Csv summary(out / "convergence_summary.csv", {"m", "index", "mu_finest", "richardson", "observed_order",
                                                  "l_sensitivity", "decay_bound"});
    for (const auto& s : table.summary)
      summary.row({num(s.m), num(s.index), num(s.mu_finest), num(s.richardson), num(s.observed_order),
                   num(s.l_sensitivity), num(s.decay_bound)});
    study = json{{"grids", {to_json(coarse), to_json(cfg.grid), to_json(longer)}}};
  } else {
    res.warnings.push_back("grid cannot be coarsened by 2; convergence study skipped");
  }

  json doc;
  doc["config"] = cfg.normalized;
  doc["unknowns"] = sol.op.size();
  doc["retained"] = static_cast<int>(sol.retained().size());
  doc["certified_classes_without_mode"] = missing;
  doc["fields"] = fields;
  doc["convergence_study"] = study;
  write_json(out / "solve.json", doc);
  if (sol.retained().empty()) res.notices.push_back("no retained modes");
  return res;
}

CommandResult run_verify(const RunConfig& cfg, const fs::path& out, bool coarse) {
  fs::create_directories(out);
  CommandResult res;
  const WaveguideSpec& spec = cfg.spec;
  const double rtol = coarse ? 1e-3 : 1e-12;
  double worst_identity = 0.0;
  double worst_printed = 0.0;

  Csv ids(out / "residuals.csv", {"N", "profile", "m", "identity", "lhs", "rhs", "residual", "printed_rhs",
                                  "printed_residual", "applicable"});
  const bool applicable =
      spec.variant() == Variant::CenteredObstacles && spec.wall_bc() == WallBc::Neumann;
  if (applicable) {
    for (int m : admissible_classes(spec)) {
      const IdentityReport rep = verify_identities(spec, m, rtol);
      for (const auto& c : rep.checks)
        ids.row({num(spec.n()), spec.profile().label(), num(m), c.name, num(c.lhs), num(c.rhs), num(c.residual),
                 num(c.printed_rhs), num(c.printed_residual), c.applicable ? "1" : "0"});
      worst_identity = std::max(worst_identity, rep.max_residual);
      worst_printed = std::max(worst_printed, rep.max_printed_residual);
      if (!rep.converged) res.warnings.push_back("quadrature did not reach its tolerance for m=" + std::to_string(m));
    }
  } else {
    res.notices.push_back("identity checks apply to Neumann walls around centered obstacles only");
  }

  std::set<int> sizes{1, 2, 3, 5, spec.n()};
  double worst_symmetry = 0.0;
  Csv sym(out / "symmetry_residuals.csv",
          {"wall_bc", "N", "sample", "completeness", "orthogonality", "idempotence", "wall_trace"});
  for (WallBc bc : {WallBc::Neumann, WallBc::Dirichlet})
    for (int n : sizes)
      for (int s = 0; s < 20; ++s) {
        std::mt19937 gen(static_cast<unsigned>(1000 * n + 100 * static_cast<int>(bc) + s));
        auto draw = [&gen] { return static_cast<double>(gen()) * 2.3283064365386963e-10 * 2.0 - 1.0; };
        auto smooth = [&] {
          std::array<double, 9> c{};
          for (auto& v : c) v = draw();
          return [c](double y) {
            double v = c[0] + c[1] * y + c[2] * y * y * 0.1;
            for (int q = 0; q < 3; ++q) v += c[3 + 2 * q] * std::sin((q + 1) * 0.9 * y + c[4 + 2 * q]);
            return v;
          };
        };
        const auto f = TransverseFunction::sample(n, 16, smooth());
        const auto h = TransverseFunction::sample(n, 16, smooth());
        const auto r = decomposition_residuals(f, h, bc);
        sym.row({to_string(bc), num(n), num(s), num(r.completeness), num(r.orthogonality), num(r.idempotence),
                 num(r.wall_trace)});
        worst_symmetry = std::max({worst_symmetry, r.completeness, r.orthogonality, r.idempotence, r.wall_trace});
      }

  const bool ok = worst_identity < kIdentityLimit && worst_symmetry < kSymmetryLimit;
  if (!ok) {
    std::ostringstream os;
    os << "residuals above limits (identities " << worst_identity << ", decomposition " << worst_symmetry << ")";
    res.warnings.push_back(os.str());
    if (!coarse) res.exit_code = 2;
  }
  if (coarse) res.warnings.push_back("coarse quadrature requested; residuals are indicative only");

  json doc;
  doc["config"] = cfg.normalized;
  doc["coarse"] = coarse;
  doc["quadrature_tolerance"] = rtol;
  doc["identity_limit"] = kIdentityLimit;
  doc["decomposition_limit"] = kSymmetryLimit;
  doc["max_identity_residual"] = worst_identity;
  doc["max_printed_form_residual"] = worst_printed;
  doc["max_decomposition_residual"] = worst_symmetry;
  doc["warnings"] = res.warnings;
  write_json(out / "verify.json", doc);
  return res;
}

CommandResult run_report(const fs::path& out) {
  CommandResult res;
  const fs::path cert_path = out / "certificates.json";
  if (!fs::exists(cert_path)) {
    res.exit_code = 1;
    res.warnings.push_back("no certificates.json in " + out.string() + "; run certify first");
    return res;
  }
  json doc;
  {
    std::ifstream in(cert_path);
    doc = json::parse(in);
  }
  const RunConfig cfg = parse_config(doc.at("config"));
  std::map<int, std::map<std::string, std::string>> modes;
  const bool have_modes = fs::exists(out / "modes.csv");
  if (have_modes) {
    for (auto& r : read_csv(out / "modes.csv")) {
      const int m = std::stoi(r["m"]);
      if (!modes.count(m)) modes[m] = r;
    }
  } else {
    res.warnings.push_back("modes.csv not found; report lists certificates only");
  }

  std::ostringstream md;
  md << "# Trapped-mode report\n\n";
  md << "Setting: " << to_string(cfg.spec.variant()) << ", " << to_string(cfg.spec.wall_bc())
     << " walls, N = " << cfg.spec.n() << ", a = " << format_number(cfg.spec.a())
     << ", profile " << cfg.spec.profile().label() << ".\n\n";
  if (!have_modes) md << "> Warning: no solver output found; eigenvalue columns are empty.\n\n";
  md << "| m | threshold | q_star | margin | certified | mu | decay rate | sqrt(threshold - mu) |\n";
  md << "|---|---|---|---|---|---|---|---|\n";
  Csv slices(out / "q_slices.csv", {"m", "axis", "value", "quotient"});
  for (const auto& c : doc.at("certificates")) {
    const int m = c.at("m").get<int>();
    const double thr = c.at("threshold").get<double>();
    md << "| " << m << " | " << format_number(thr) << " | " << format_number(c.at("q_star").get<double>()) << " | "
       << format_number(c.at("margin").get<double>()) << " | " << (c.at("valid").get<bool>() ? "yes" : "no") << " | ";
    if (modes.count(m)) {
      const double mu = std::stod(modes[m]["mu"]);
      md << modes[m]["mu"] << " | " << modes[m]["decay_rate"] << " | " << format_number(std::sqrt(thr - mu)) << " |\n";
    } else {
      md << " |  |  |\n";
    }
    const TestParams best{c.at("lambda").get<double>(), c.at("alpha").get<double>(), c.at("b").get<double>()};
    for (int t = 0; t <= 20; ++t) {
      const double f = std::pow(10.0, -1.0 + 0.1 * t);
      TestParams p = best;
      p.lambda = best.lambda * f;
      slices.row({num(m), "lambda", num(p.lambda), num(quotient_quadrature(cfg.spec, m, p, 1e-9).quotient)});
    }
    for (int t = 0; t <= 20; ++t) {
      TestParams p = best;
      p.alpha = best.alpha * std::pow(10.0, -1.0 + 0.1 * t);
      slices.row({num(m), "alpha", num(p.alpha), num(quotient_quadrature(cfg.spec, m, p, 1e-9).quotient)});
    }
    for (int t = 0; t <= 19; ++t) {
      TestParams p = best;
      p.b = cfg.spec.a() * 0.05 * t;
      slices.row({num(m), "b", num(p.b), num(quotient_quadrature(cfg.spec, m, p, 1e-9).quotient)});
    }
  }
  if (doc.at("certificates").empty()) md << "\nNo admissible classes in this setting.\n";
  std::vector<std::string> field_files;
  for (const auto& e : fs::directory_iterator(out)) {
    const auto name = e.path().filename().string();
    if (name.rfind("field_m", 0) == 0) field_files.push_back(name);
  }
  std::sort(field_files.begin(), field_files.end());
  md << "\nPlot data: q_slices.csv (quotient along lambda, alpha and b through each certificate)";
  for (const auto& f : field_files) md << ", " << f;
  md << ".\n";
  std::ofstream(out / "report.md", std::ios::binary) << md.str();
  return res;
}

}  // namespace trapmodes
