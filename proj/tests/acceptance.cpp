// Acceptance suite: one PASS/FAIL line per criterion, with the measured
// quantity, its tolerance and the runtime. Exit status is the number of
// failing criteria. Optional argument: scratch directory for exported files.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fock_oracle.hpp"
#include "lgbh/config.hpp"
#include "lgbh/couplings.hpp"
#include "lgbh/design.hpp"
#include "lgbh/manybody.hpp"
#include "lgbh/oracle.hpp"
#include "lgbh/pipeline.hpp"

namespace fs = std::filesystem;
using namespace lgbh;

namespace {

// Tolerances and limits.
constexpr double kOrthoTol = 1e-8;
constexpr double kOrthoSeconds = 10.0;
constexpr double kOracleTol = 1e-6;
constexpr int kOracleCases = 24;
constexpr double kOracleSeconds = 60.0;
constexpr double kMinActiveHop = 1e-6;
constexpr double kSlopeTol = 0.02;
constexpr double kFig3Seconds = 120.0;
constexpr double kFluxTol = 1e-8;
constexpr double kGaugeFluxTol = 1e-9;
constexpr double kGaugeSpectrumTol = 1e-9;
constexpr double kGaugeHopTol = 1e-10;
constexpr double kOperatorRelTol = 1e-13;
constexpr double kDriftTol = 1e-9;
constexpr double kHandCalcTol = 1e-14;
constexpr double kTotalSeconds = 300.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(const std::string& name, double limit_seconds, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = limit_seconds <= 0.0 || secs < limit_seconds;
  const bool pass = out.pass && in_time;
  if (!pass) ++failures;
  char timing[64];
  if (limit_seconds > 0.0)
    std::snprintf(timing, sizeof timing, "%.2fs (limit %.0fs)", secs, limit_seconds);
  else
    std::snprintf(timing, sizeof timing, "%.2fs", secs);
  std::printf("%s  %-32s %s  [%s]\n", pass ? "PASS" : "FAIL", name.c_str(), out.detail.c_str(), timing);
  std::fflush(stdout);
}

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", x);
  return buf;
}

/// Random non-negative profile: k = 1..kmax with total modulation below c_0.
DensityProfile random_profile(std::mt19937_64& rng, int kmax_limit = 4) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> kmax_dist(1, kmax_limit);
  const int kmax = kmax_dist(rng);
  std::vector<Harmonic> hs{{0, 0.5 + u(rng), 0.0}};
  double total = 0.0;
  for (int k = 1; k <= kmax; ++k) {
    hs.push_back({k, 0.1 + u(rng), 2.0 * pi * u(rng)});
    total += hs.back().c;
  }
  const double scale = hs[0].c * (0.2 + 0.75 * u(rng)) / total;
  for (std::size_t i = 1; i < hs.size(); ++i) hs[i].c *= scale;
  return DensityProfile(2.0 + 3.0 * u(rng), hs);
}

double max_abs(const Eigen::MatrixXcd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw IoError("cannot read " + p.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream s(line);
    std::string cell;
    while (std::getline(s, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

/// All fluxes of unbroken interior plaquettes, computed from the hop product
/// arg(t01 t12 t20) rather than a sum of phases.
std::vector<double> plaquette_fluxes(const CouplingSet& cs) {
  std::vector<double> out;
  for (int p : cs.window.p_values)
    for (auto shape : {PlaquetteShape::nearest, PlaquetteShape::extended})
      for (const auto& c : interior_plaquettes(cs.window, shape, p)) {
        const complex prod = cs.hop(c[0], c[1]) * cs.hop(c[1], c[2]) * cs.hop(c[2], c[0]);
        out.push_back(std::abs(prod) > 1e-30 ? std::arg(prod) : std::nan(""));
      }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path scratch = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "lgbh_acceptance";
  fs::remove_all(scratch);
  const auto suite_start = std::chrono::steady_clock::now();
  const ModeWindow fig_window{-7, 7, {0}};

  criterion("mode orthonormality", kOrthoSeconds, [] {
    const ModeWindow w{-7, 7, {0, 1}};
    const auto modes = w.modes();
    const Eigen::MatrixXcd g = gram_matrix(modes, BeamParameters{});
    const double dev = max_abs(g - Eigen::MatrixXcd::Identity(g.rows(), g.cols()));
    return Outcome{dev <= kOrthoTol, "30 modes, max|G-I| = " + sci(dev) + " (tol " + sci(kOrthoTol) + ")"};
  });

  criterion("oracle equivalence", kOracleSeconds, [] {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> l_dist(-7, 7), p_dist(0, 1);
    double worst = 0.0;
    int counts[3] = {0, 0, 0};
    for (int c = 0; c < kOracleCases; ++c) {
      const DensityProfile profile = random_profile(rng);
      BeamParameters beam;
      beam.waist = 0.7 + 0.8 * u(rng);
      beam.gouy_rate = u(rng) - 0.5;
      beam.longitudinal_fill = 0.5 + u(rng);
      const auto kind = static_cast<CouplingKind>(c % 3);
      ModeIndex a{l_dist(rng), p_dist(rng)}, b{l_dist(rng), p_dist(rng)};
      if (kind == CouplingKind::t) {
        // Draw a separation carried by the profile so the hop is non-zero.
        std::uniform_int_distribution<int> k_dist(1, profile.max_order());
        const int k = k_dist(rng);
        a.l = std::clamp(a.l, -7, 7 - k);
        b = {a.l + k, p_dist(rng)};
        if (c % 2) std::swap(a, b);
      }
      if (kind == CouplingKind::mu) b = a;
      const ModeWindow w{std::min(a.l, b.l), std::max(a.l, b.l), a.p == b.p ? std::vector<int>{a.p}
                                                                            : std::vector<int>{0, 1}};
      const CouplingSet cs = compute_couplings(w, profile, beam);
      const int i = *w.index_of(a), j = *w.index_of(b);
      const complex got =
          kind == CouplingKind::t ? cs.t(i, j) : kind == CouplingKind::U ? complex(cs.U(i, j)) : complex(cs.mu(i));
      const complex ref = brute_force_coupling(a, b, kind, profile, beam);
      if (std::abs(ref) < kMinActiveHop) throw std::runtime_error("degenerate oracle case");
      worst = std::max(worst, std::abs(got - ref) / std::abs(ref));
      ++counts[c % 3];
    }
    return Outcome{worst <= kOracleTol, std::to_string(kOracleCases) + " cases (t " + std::to_string(counts[0]) +
                                            ", U " + std::to_string(counts[1]) + ", mu " + std::to_string(counts[2]) +
                                            "), max rel dev = " + sci(worst) + " (tol " + sci(kOracleTol) + ")"};
  });

  criterion("lattice geometries", 0.0, [&] {
    const BeamParameters beam;
    bool ok = true;
    std::string detail;
    // Chain: t[n, n+2] exactly zero, nearest neighbours present.
    {
      const auto cs = compute_couplings(fig_window, preset_profile(ChainTarget{}), beam);
      double t2 = 0.0, t1_min = 1e300, beyond = 0.0;
      for (int l = -7; l <= 7; ++l)
        for (int m = -7; m <= 7; ++m) {
          const double a = std::abs(cs.hop({l, 0}, {m, 0}));
          if (std::abs(l - m) == 1) t1_min = std::min(t1_min, a);
          if (std::abs(l - m) == 2) t2 = std::max(t2, a);
          if (std::abs(l - m) >= 2) beyond = std::max(beyond, a);
        }
      ok = ok && t2 == 0.0 && beyond == 0.0 && t1_min > kMinActiveHop;
      detail += "chain max|t2| = " + sci(t2) + ", min|t1| = " + sci(t1_min);
    }
    // Ladder: t1 and t2 non-zero; the sign of each follows cos(phi_k).
    {
      int sign_ok = 0;
      for (double phi1 : {0.0, pi})
        for (double phi2 : {0.0, pi}) {
          const auto cs = compute_couplings(fig_window, preset_profile(TriangularLadderTarget{phi1, phi2, 1.0 / 3.0}), beam);
          bool good = true;
          for (int l = -7; l + 2 <= 7; ++l) {
            const double t1 = cs.hop({l, 0}, {l + 1, 0}).real(), t2 = cs.hop({l, 0}, {l + 2, 0}).real();
            good = good && std::abs(t1) > kMinActiveHop && std::abs(t2) > kMinActiveHop &&
                   std::signbit(t1) == (std::cos(phi1) < 0) && std::signbit(t2) == (std::cos(phi2) < 0) &&
                   (l + 3 > 7 || std::abs(cs.hop({l, 0}, {l + 3, 0})) == 0.0);
          }
          sign_ok += good;
        }
      ok = ok && sign_ok == 4;
      detail += "; ladder sign patterns " + std::to_string(sign_ok) + "/4";
    }
    // Extended triangle: ranges 1..3 present, nothing beyond.
    {
      const auto cs = compute_couplings(fig_window, preset_profile(ExtendedTriangleTarget{}), beam);
      double active_min = 1e300, beyond = 0.0;
      for (int l = -7; l <= 7; ++l)
        for (int m = -7; m <= 7; ++m) {
          const int d = std::abs(l - m);
          const double a = std::abs(cs.hop({l, 0}, {m, 0}));
          if (d >= 1 && d <= 3) active_min = std::min(active_min, a);
          if (d > 3) beyond = std::max(beyond, a);
        }
      ok = ok && active_min > kMinActiveHop && beyond == 0.0;
      detail += "; extended min|t1..3| = " + sci(active_min) + ", max|t>3| = " + sci(beyond);
    }
    return Outcome{ok, detail};
  });

  criterion("power-law hopping", kFig3Seconds, [&] {
    bool ok = true;
    std::string detail;
    for (double beta : {0.5, 1.0, 2.0}) {
      char text[256];
      std::snprintf(text, sizeof text,
                    R"({"target": {"type": "power_law", "beta": %.17g, "range": 7, "calibrate": true},
                        "window": {"l_min": -7, "l_max": 7, "p_values": [0]}, "tasks": ["compute", "design"]})",
                    beta);
      const RunConfig cfg = parse_config_text(text);
      const fs::path dir = scratch / ("powerlaw_beta" + fmt(beta));
      run(cfg, {dir.string(), 1, 0, nullptr});

      // Heatmap: 15 x 15 with non-zero entries exactly on the 7 off-diagonals.
      Eigen::MatrixXd heat = Eigen::MatrixXd::Constant(15, 15, -1.0);
      for (const auto& r : read_csv(dir / "heatmap.csv")) heat(std::stoi(r[0]), std::stoi(r[1])) = std::stod(r[6]);
      bool banded = heat.minCoeff() >= 0.0;
      for (int i = 0; i < 15; ++i)
        for (int j = 0; j < 15; ++j) {
          const int d = std::abs(i - j);
          banded = banded && ((d >= 1 && d <= 7) ? heat(i, j) > kMinActiveHop : heat(i, j) == 0.0);
        }

      // Slope: own least squares on the exported centre row, and the exported fit.
      const int c = 7;
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (int k = 1; k <= 7; ++k) {
        const double x = std::log(k), y = std::log(heat(c, c + k));
        sx += x, sy += y, sxx += x * x, sxy += x * y;
      }
      const double slope = (7 * sxy - sx * sy) / (7 * sxx - sx * sx);
      double reported = std::nan("");
      for (const auto& r : read_csv(dir / "fit_report.csv"))
        if (r[0] == "calibrated") reported = std::stod(r[3]);
      const bool good = banded && std::abs(slope + beta) <= kSlopeTol && std::abs(reported - slope) <= 1e-12;
      ok = ok && good;
      char line[160];
      std::snprintf(line, sizeof line, "%sbeta %.1f: slope %.6f, banded %s", detail.empty() ? "" : "; ", beta,
                    slope, banded ? "yes" : "no");
      detail += line;
    }
    return Outcome{ok, detail + " (tol " + sci(kSlopeTol) + ")"};
  });

  criterion("flux design", 0.0, [&] {
    const FluxDesign d = design_fluxes(pi, pi / 2);
    const auto cs = compute_couplings(fig_window, flux_profile(d), BeamParameters{});
    double dev1 = 0.0, dev2 = 0.0;
    int n1 = 0, n2 = 0;
    for (const auto& c : interior_plaquettes(fig_window, PlaquetteShape::nearest)) {
      dev1 = std::max(dev1, std::abs(wrap_angle(flux_of_plaquette(cs, c) - pi)));
      ++n1;
    }
    for (const auto& c : interior_plaquettes(fig_window, PlaquetteShape::extended)) {
      dev2 = std::max(dev2, std::abs(wrap_angle(flux_of_plaquette(cs, c) - pi / 2)));
      ++n2;
    }
    // Independent evaluation from the hop products.
    double dev_prod = 0.0;
    const auto fluxes = plaquette_fluxes(cs);
    for (std::size_t i = 0; i < fluxes.size(); ++i)
      dev_prod = std::max(dev_prod, std::abs(wrap_angle(fluxes[i] - (i < static_cast<std::size_t>(n1) ? pi : pi / 2))));
    const bool ok = std::max({dev1, dev2, dev_prod}) <= kFluxTol && n1 == 13 && n2 == 12;
    return Outcome{ok, std::to_string(n1) + " Theta1 plaquettes max dev " + sci(dev1) + ", " + std::to_string(n2) +
                           " Theta2 plaquettes max dev " + sci(dev2) + ", hop-product dev " + sci(dev_prod) +
                           " (tol " + sci(kFluxTol) + ")"};
  });

  criterion("gauge invariance", 0.0, [&] {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * pi);
    double flux_dev = 0.0, spec_dev = 0.0, hop_dev = 0.0;
    int compared = 0;
    for (int n = 0; n < 10; ++n) {
      const DensityProfile profile = random_profile(rng);
      const auto cs = compute_couplings(fig_window, profile, BeamParameters{});
      const auto fluxes = plaquette_fluxes(cs);
      const Eigen::VectorXd spectrum = single_particle_spectrum(cs);
      for (int a = 0; a < 10; ++a) {
        const double alpha = angle(rng);
        const auto rot = compute_couplings(fig_window, rotate(profile, alpha), BeamParameters{});
        const auto rf = plaquette_fluxes(rot);
        for (std::size_t i = 0; i < fluxes.size(); ++i)
          if (!std::isnan(fluxes[i])) {
            flux_dev = std::max(flux_dev, std::abs(wrap_angle(rf[i] - fluxes[i])));
            ++compared;
          }
        spec_dev = std::max(spec_dev, (single_particle_spectrum(rot) - spectrum).cwiseAbs().maxCoeff());
        for (int i = 0; i < cs.size(); ++i)
          for (int j = 0; j < cs.size(); ++j) {
            const complex expect = cs.t(i, j) * std::polar(1.0, -(cs.modes[i].l - cs.modes[j].l) * alpha);
            hop_dev = std::max(hop_dev, std::abs(rot.t(i, j) - expect));
          }
      }
    }
    const bool ok = flux_dev <= kGaugeFluxTol && spec_dev <= kGaugeSpectrumTol && hop_dev <= kGaugeHopTol;
    return Outcome{ok, "100 rotations, " + std::to_string(compared) + " flux comparisons: flux dev " + sci(flux_dev) +
                           ", spectrum dev " + sci(spec_dev) + ", t dev " + sci(hop_dev)};
  });

  criterion("U phase independence", 0.0, [&] {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * pi);
    const ModeWindow w{-7, 7, {0, 1}};
    int identical = 0, total = 0;
    for (int n = 0; n < 5; ++n) {
      const DensityProfile base = random_profile(rng);
      const auto ref = compute_couplings(w, base, BeamParameters{});
      for (int trial = 0; trial < 4; ++trial) {
        std::vector<Harmonic> hs = base.harmonics();
        for (auto& h : hs)
          if (h.k > 0) h.phi = angle(rng);
        const auto other = compute_couplings(w, DensityProfile(base.radius(), hs), BeamParameters{});
        identical += (other.U.array() == ref.U.array()).all();
        ++total;
      }
    }
    return Outcome{identical == total, std::to_string(identical) + "/" + std::to_string(total) +
                                           " re-phased profiles give bit-identical U (30 modes)"};
  });

  criterion("many-body correctness", 0.0, [&] {
    std::mt19937_64 rng(13);
    bool ok = true;
    double op_dev = 0.0, comm = 0.0;
    int cases = 0;
    std::vector<CouplingSet> sets;
    for (int m = 1; m <= 3; ++m)
      for (auto sign : {InteractionSign::attractive, InteractionSign::repulsive})
        sets.push_back(testing::random_couplings(m, rng, sign));
    sets.push_back(compute_couplings({-1, 1, {0}}, preset_profile(TriangularLadderTarget{}), BeamParameters{}));
    for (const auto& cs : sets)
      for (int n = 0; n <= 2; ++n) {
        const testing::TruncatedFockSpace space(cs.size(), n);
        const Eigen::MatrixXcd full = space.hamiltonian(cs);
        const FockBasis basis(cs.size(), n);
        const Eigen::MatrixXcd got(build_hamiltonian(cs, basis).matrix);
        const Eigen::MatrixXcd expect = space.restrict(full, basis);
        op_dev = std::max(op_dev, max_abs(got - expect) / std::max(1.0, expect.cwiseAbs().rowwise().sum().maxCoeff()));
        const Eigen::MatrixXcd num = space.number_operator();
        comm = std::max(comm, max_abs(full * num - num * full));
        ++cases;
      }
    ok = ok && op_dev <= kOperatorRelTol && comm <= kOperatorRelTol;

    // Energy and norm drift under unitary evolution.
    const auto cs = compute_couplings({-2, 1, {0}}, preset_profile(ExtendedTriangleTarget{}), BeamParameters{});
    const ManyBodyOperator op = build_hamiltonian(cs, FockBasis(cs.size(), 3));
    Eigen::VectorXcd psi(op.basis.dimension());
    std::normal_distribution<double> gauss;
    for (Eigen::Index i = 0; i < psi.size(); ++i) psi(i) = complex(gauss(rng), gauss(rng));
    psi.normalize();
    const double e0 = expectation(op, psi).real();
    const Propagator prop(op);
    double drift = 0.0;
    for (double t : {0.5, 1.0, 2.0, 5.0, 10.0, 50.0}) {
      const Eigen::VectorXcd phi = prop.evolve(psi, t);
      drift = std::max({drift, std::abs(expectation(op, phi).real() - e0) / std::abs(e0), std::abs(phi.norm() - 1.0)});
    }
    ok = ok && drift < kDriftTol;

    // Single mode, one photon, attractive: mu - 7U.
    const double mu = 0.37, u = 0.05;
    const auto one = CouplingSet::from_matrices({0, 0, {0}}, Eigen::VectorXd::Constant(1, mu),
                                                Eigen::MatrixXcd::Zero(1, 1), Eigen::MatrixXd::Constant(1, 1, u));
    const complex e1 = Eigen::MatrixXcd(build_hamiltonian(one, FockBasis(1, 1)).matrix)(0, 0);
    const double hand = std::abs(e1 - (mu - 7.0 * u));
    ok = ok && hand <= kHandCalcTol;

    return Outcome{ok, std::to_string(cases) + " (M<=3, N<=2) cases: max rel dev " + sci(op_dev) + ", max|[H,N]| " +
                           sci(comm) + "; energy/norm drift " + sci(drift) + "; |E - (mu - 7U)| = " + sci(hand)};
  });

  criterion("translational-invariance report", 0.0, [&] {
    std::string detail;
    const std::vector<std::pair<std::string, DesignTarget>> presets{
        {"chain", ChainTarget{}}, {"ladder", TriangularLadderTarget{}}, {"extended", ExtendedTriangleTarget{}}};
    for (const auto& [name, target] : presets) {
      const auto cs = compute_couplings(fig_window, preset_profile(target), BeamParameters{});
      detail += (detail.empty() ? "" : "; ") + name + ":";
      for (const auto& s : translation_report(cs, 0)) {
        char buf[48];
        std::snprintf(buf, sizeof buf, " k=%d %.3f", s.k, s.relative_spread);
        detail += buf;
      }
    }
    return Outcome{true, "relative spread (max-min)/mean of |t[n,n+k]| - " + detail + " (reported, no threshold)"};
  });

  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - suite_start).count();
  std::printf("%s  %-32s %.2fs (limit %.0fs)\n", total < kTotalSeconds ? "PASS" : "FAIL", "total runtime", total,
              kTotalSeconds);
  if (total >= kTotalSeconds) ++failures;
  std::printf("%d criteria failed\n", failures);
  return failures;
}
