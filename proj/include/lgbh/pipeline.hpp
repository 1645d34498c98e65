#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "lgbh/config.hpp"
#include "lgbh/couplings.hpp"
#include "lgbh/design.hpp"
#include "lgbh/manybody.hpp"
#include "lgbh/oracle.hpp"

namespace lgbh {

/// Shortest-exact decimal for CSV: 17 significant digits.
inline std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::string& header) : path_(path), out_(path) {
    if (!out_) throw IoError("cannot write '" + path.string() + "'");
    out_ << header << '\n';
  }

  template <class... Fields>
  void row(const Fields&... fields) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(fields), first = false), ...);
    out_ << '\n';
    if (!out_) throw IoError("write failed for '" + path_.string() + "'");
  }

 private:
  static std::string cell(double x) { return fmt(x); }
  static std::string cell(int x) { return std::to_string(x); }
  static std::string cell(std::size_t x) { return std::to_string(x); }
  static std::string cell(bool x) { return x ? "true" : "false"; }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }

  std::filesystem::path path_;
  std::ofstream out_;
};

inline void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

// ---- exporters ----

inline void write_mu(const std::filesystem::path& path, const CouplingSet& cs) {
  CsvWriter w(path, "l,p,mu");
  for (int i = 0; i < cs.size(); ++i) w.row(cs.modes[i].l, cs.modes[i].p, cs.mu(i));
}

/// Row (a, b) holds t(a, b), the amplitude of the hop a -> b.
inline void write_t(const std::filesystem::path& path, const CouplingSet& cs) {
  CsvWriter w(path, "l_from,p_from,l_to,p_to,re,im");
  for (int i = 0; i < cs.size(); ++i)
    for (int j = 0; j < cs.size(); ++j)
      w.row(cs.modes[i].l, cs.modes[i].p, cs.modes[j].l, cs.modes[j].p, cs.t(i, j).real(), cs.t(i, j).imag());
}

inline void write_u(const std::filesystem::path& path, const CouplingSet& cs) {
  CsvWriter w(path, "l_a,p_a,l_b,p_b,value");
  for (int i = 0; i < cs.size(); ++i)
    for (int j = 0; j < cs.size(); ++j) w.row(cs.modes[i].l, cs.modes[i].p, cs.modes[j].l, cs.modes[j].p, cs.U(i, j));
}

/// Long-format grid of |t| and arg t (arg is 0 where t vanishes).
inline void write_heatmap(const std::filesystem::path& path, const CouplingSet& cs) {
  CsvWriter w(path, "row,col,l_from,p_from,l_to,p_to,abs_t,arg_t");
  for (int i = 0; i < cs.size(); ++i)
    for (int j = 0; j < cs.size(); ++j) {
      const complex t = cs.t(i, j);
      w.row(i, j, cs.modes[i].l, cs.modes[i].p, cs.modes[j].l, cs.modes[j].p, std::abs(t),
            t == 0.0 ? 0.0 : std::arg(t));
    }
}

inline std::vector<TranslationSpread> translation_report(const CouplingSet& cs, int p) {
  std::vector<TranslationSpread> out;
  const int reach = std::min(cs.profile.max_order(), cs.window.l_max - cs.window.l_min);
  for (int k = 1; k <= reach; ++k)
    if (cs.profile.is_active(k)) out.push_back(translation_spread(cs, k, p));
  return out;
}

inline void write_translation(const std::filesystem::path& path, const CouplingSet& cs) {
  CsvWriter w(path, "p,k,samples,min_abs_t,max_abs_t,mean_abs_t,relative_spread");
  for (int p : cs.window.p_values)
    for (const auto& s : translation_report(cs, p)) w.row(p, s.k, s.samples, s.min, s.max, s.mean, s.relative_spread);
}

inline json conventions() {
  return {
      {"hopping", "t(a,b) is the amplitude of the hop a -> b: H contains t(a,b) b_b^dag b_a for each ordered pair a != b"},
      {"hopping_phase", "a hop l -> l+k through harmonic k carries phase -phi_k (times the sign of the radial overlap)"},
      {"interaction", "-s sum_{a,b} U(a,b) (3 n_a + 4 n_a n_b), s = +1 attractive, -1 repulsive, a = b included"},
      {"ordering", "hopping is the normal-ordered form of t b_a b_b^dag; reordering only shifts mu"},
      {"density", "rho(r,phi) = sum_k c_k cos(k phi + phi_k) for r <= R, 0 outside"},
      {"angles", "radians"}};
}

// ---- check ----

struct CheckResult {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

/// Runs the invariant suite on the coupling set of a config. `seed` only
/// selects the randomized oracle pairs and gauge angles.
inline std::vector<CheckResult> run_checks(const CouplingSet& cs, const CheckSettings& settings, std::uint64_t seed,
                                           int threads) {
  std::vector<CheckResult> out;
  auto add = [&](std::string name, double value, double threshold) {
    out.push_back({std::move(name), value, threshold, value <= threshold});
  };

  const Eigen::MatrixXcd gram = gram_matrix(cs.modes, cs.beam);
  add("orthonormality_max_abs", (gram - Eigen::MatrixXcd::Identity(cs.size(), cs.size())).cwiseAbs().maxCoeff(),
      1e-8);

  add("hermiticity_t_max_abs", (cs.t - cs.t.adjoint()).cwiseAbs().maxCoeff(), 0.0);
  add("symmetry_u_max_abs", (cs.U - cs.U.transpose()).cwiseAbs().maxCoeff(), 0.0);

  // Oracle pairs: hops are drawn among pairs the profile actually couples.
  std::mt19937_64 rng(seed);
  std::vector<std::pair<int, int>> hop_pairs;
  for (int i = 0; i < cs.size(); ++i)
    for (int j = 0; j < cs.size(); ++j)
      if (i != j && cs.profile.is_active(std::abs(cs.modes[i].l - cs.modes[j].l))) hop_pairs.emplace_back(i, j);
  std::uniform_int_distribution<int> pick_mode(0, cs.size() - 1);
  double worst = 0.0;
  for (int c = 0; c < settings.oracle_cases; ++c) {
    auto kind = static_cast<CouplingKind>(c % 3);
    if (kind == CouplingKind::t && hop_pairs.empty()) kind = CouplingKind::mu;
    int i = pick_mode(rng), j = pick_mode(rng);
    if (kind == CouplingKind::t) {
      std::uniform_int_distribution<std::size_t> pick(0, hop_pairs.size() - 1);
      std::tie(i, j) = hop_pairs[pick(rng)];
    }
    const complex ref = brute_force_coupling(cs.modes[i], cs.modes[j], kind, cs.profile, cs.beam);
    const complex got = kind == CouplingKind::t ? cs.t(i, j) : kind == CouplingKind::U ? complex(cs.U(i, j)) : complex(cs.mu(i));
    const double scale = std::abs(ref);
    worst = std::max(worst, scale > 0.0 ? std::abs(got - ref) / scale : std::abs(got));
  }
  add("oracle_max_relative_deviation", worst, 1e-6);

  // Gauge: rotating the density by alpha multiplies t(a,b) by exp(-i (l_a - l_b) alpha)
  // and leaves U, fluxes and the single-particle spectrum unchanged.
  std::uniform_real_distribution<double> angle(0.0, 2.0 * pi);
  const Eigen::VectorXd spectrum = single_particle_spectrum(cs);
  std::vector<std::vector<ModeIndex>> plaquettes;
  for (int p : cs.window.p_values)
    for (auto shape : {PlaquetteShape::nearest, PlaquetteShape::extended})
      for (auto& c : interior_plaquettes(cs.window, shape, p)) {
        try {
          flux_of_plaquette(cs, c);
          plaquettes.push_back(std::move(c));
        } catch (const BrokenPlaquette&) {
        }
      }
  double t_dev = 0.0, spec_dev = 0.0, flux_dev = 0.0, u_dev = 0.0;
  for (int n = 0; n < settings.gauge_angles; ++n) {
    const double alpha = angle(rng);
    const CouplingSet rot = compute_couplings(cs.window, rotate(cs.profile, alpha), cs.beam, threads);
    for (int i = 0; i < cs.size(); ++i)
      for (int j = 0; j < cs.size(); ++j) {
        const complex expect = cs.t(i, j) * std::polar(1.0, -(cs.modes[i].l - cs.modes[j].l) * alpha);
        t_dev = std::max(t_dev, std::abs(rot.t(i, j) - expect));
      }
    spec_dev = std::max(spec_dev, (single_particle_spectrum(rot) - spectrum).cwiseAbs().maxCoeff());
    for (const auto& c : plaquettes)
      flux_dev = std::max(flux_dev, std::abs(wrap_angle(flux_of_plaquette(rot, c) - flux_of_plaquette(cs, c))));
    u_dev = std::max(u_dev, (rot.U - cs.U).cwiseAbs().maxCoeff());
  }
  add("gauge_t_transform_max_abs", t_dev, 1e-10);
  add("gauge_spectrum_max_abs", spec_dev, 1e-9);
  add("gauge_flux_max_abs", flux_dev, 1e-9);
  add("u_phase_independence_max_abs", u_dev, 0.0);
  return out;
}

// ---- run ----

struct RunOptions {
  std::string output;  // overrides the config's output directory when set
  int threads = 1;
  std::uint64_t seed = 0;
  std::ostream* log = nullptr;
};

struct RunReport {
  std::filesystem::path directory;
  std::vector<std::string> files;
  std::vector<CheckResult> checks;
  bool checks_passed = true;
};

inline std::filesystem::path prepare_output(const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path path(dir);
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec || !fs::is_directory(path)) throw IoError("cannot create output directory '" + dir + "'");
  const fs::path probe = path / ".lgbh_write_probe";
  {
    std::ofstream f(probe);
    if (!f) throw IoError("output directory '" + dir + "' is not writable");
  }
  fs::remove(probe, ec);
  return path;
}

/// The profile a config describes, designing it when a target is given.
inline DensityProfile resolve_profile(const RunConfig& cfg) {
  if (const auto* p = std::get_if<DensityProfile>(&cfg.source)) return *p;
  return design_profile(std::get<DesignTarget>(cfg.source), cfg.window, cfg.beam, cfg.radius);
}

inline void write_fit(CsvWriter& w, const std::string& mode, const PowerLawFit& fit) {
  const double slope = fit.slope.value_or(std::nan(""));
  for (std::size_t i = 0; i < fit.k.size(); ++i) w.row(mode, fit.k[i], fit.abs_t[i], slope, fit.residual[i]);
}

inline RunReport run(const RunConfig& cfg, const RunOptions& opt = {}) {
  RunReport report;
  report.directory = prepare_output(opt.output.empty() ? cfg.output : opt.output);
  auto path = [&](const std::string& name) {
    report.files.push_back(name);
    return report.directory / name;
  };
  auto log = [&](const std::string& s) {
    if (opt.log) *opt.log << s << '\n';
  };

  const DensityProfile profile = resolve_profile(cfg);
  const CouplingSet cs = compute_couplings(cfg.window, profile, cfg.beam, opt.threads);
  log("couplings: " + std::to_string(cs.size()) + " modes");

  json summary;
  summary["config"] = to_json(cfg);
  summary["profile"] = to_json(profile);
  summary["modes"] = cs.size();
  summary["conventions"] = conventions();
  summary["quadrature"] = {{"t_max_order", cs.t_orders.maxCoeff()}, {"u_max_order", cs.u_orders.maxCoeff()},
                           {"rel_tol", 1e-10}};

  for (const auto& task : cfg.tasks) {
    switch (task.kind) {
      case TaskKind::compute: {
        write_mu(path("mu.csv"), cs);
        write_t(path("t_matrix.csv"), cs);
        write_u(path("u_matrix.csv"), cs);
        write_heatmap(path("heatmap.csv"), cs);
        write_translation(path("translation_report.csv"), cs);
        json spread = json::array();
        for (int p : cs.window.p_values)
          for (const auto& s : translation_report(cs, p))
            spread.push_back({{"p", p}, {"k", s.k}, {"relative_spread", s.relative_spread}});
        summary["translation_spread"] = spread;
        break;
      }
      case TaskKind::design: {
        RunConfig designed = cfg;
        designed.source = profile;
        designed.radius = profile.radius();
        designed.tasks = {Task{TaskKind::compute, {}}};
        write_json(path("profile.json"), to_json(designed));
        if (!cfg.has_target()) break;
        const auto& target = std::get<DesignTarget>(cfg.source);
        if (const auto* pl = std::get_if<PowerLawTarget>(&target)) {
          CsvWriter w(path("fit_report.csv"), "mode,k,abs_t,fitted_slope,residual");
          // Both the calibrated and the raw (c_k = A k^-beta) designs are reported.
          const auto own = fit_power_law(cs, pl->range);
          write_fit(w, pl->calibrate ? "calibrated" : "raw", own);
          const DensityProfile other =
              design_power_law(pl->beta, pl->range, cfg.window, cfg.beam, !pl->calibrate, cfg.radius);
          const auto other_fit = fit_power_law(compute_couplings(cfg.window, other, cfg.beam, opt.threads), pl->range);
          write_fit(w, pl->calibrate ? "raw" : "calibrated", other_fit);
          summary["power_law"] = {{"beta", pl->beta}, {"range", pl->range}, {"target_slope", -pl->beta}};
          if (own.slope) summary["power_law"]["fitted_slope"] = *own.slope;
        }
        if (const auto* ft = std::get_if<FluxTarget>(&target)) {
          const FluxDesign d = design_fluxes(ft->theta1, ft->theta2, ft->gauge_theta1);
          CsvWriter w(path("flux_report.csv"), "plaquette,p,l0,l1,l2,flux,target,deviation");
          for (int p : cfg.window.p_values) {
            auto emit = [&](PlaquetteShape shape, const char* name, double goal) {
              for (const auto& c : interior_plaquettes(cfg.window, shape, p)) {
                const double f = flux_of_plaquette(cs, c);
                w.row(name, p, c[0].l, c[1].l, c[2].l, f, goal, std::abs(wrap_angle(f - goal)));
              }
            };
            emit(PlaquetteShape::nearest, "theta1", wrap_angle(ft->theta1));
            if (d.ranges == 3) emit(PlaquetteShape::extended, "theta2", wrap_angle(*ft->theta2));
          }
        }
        break;
      }
      case TaskKind::diagonalize: {
        const int n = task.diagonalize.photons;
        const FockBasis basis(cs.size(), n);
        const ManyBodyOperator op = build_hamiltonian(cs, basis);
        const EigenResult res = eigensolve(op, task.diagonalize.count);
        const std::string tag = "_N" + std::to_string(n);
        {
          CsvWriter w(path("eigenvalues" + tag + ".csv"), "index,value");
          for (Eigen::Index i = 0; i < res.values.size(); ++i) w.row(static_cast<int>(i), res.values(i));
        }
        CsvWriter w(path("occupations" + tag + ".csv"), "index,l,p,occupation");
        for (Eigen::Index i = 0; i < res.vectors.cols(); ++i) {
          const Eigen::VectorXd occ = occupations(basis, res.vectors.col(i));
          for (int a = 0; a < cs.size(); ++a) w.row(static_cast<int>(i), cs.modes[a].l, cs.modes[a].p, occ(a));
        }
        summary["diagonalize"]["N" + std::to_string(n)] = {{"dimension", basis.dimension()},
                                                            {"solver", res.dense ? "dense" : "lanczos"},
                                                            {"residual_bound", 1e-9 * res.norm_estimate}};
        log("diagonalize N=" + std::to_string(n) + ": dimension " + std::to_string(basis.dimension()));
        break;
      }
      case TaskKind::check: {
        report.checks = run_checks(cs, cfg.check, opt.seed, opt.threads);
        CsvWriter w(path("check_report.csv"), "check,value,threshold,pass");
        for (const auto& c : report.checks) {
          w.row(c.name, c.value, c.threshold, c.pass);
          report.checks_passed = report.checks_passed && c.pass;
          char line[160];
          std::snprintf(line, sizeof line, "%s %s = %.3e (threshold %.1e)", c.pass ? "PASS" : "FAIL",
                        c.name.c_str(), c.value, c.threshold);
          log(line);
        }
        break;
      }
    }
  }
  summary["files"] = report.files;
  write_json(path("summary.json"), summary);
  return report;
}

/// Machine-readable failure record.
inline json error_record(const Error& e) {
  return {{"error", e.kind()}, {"message", e.what()}, {"exit_code", e.code()}};
}

}  // namespace lgbh
