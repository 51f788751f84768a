// jc: command-line front end for the driven, damped Jaynes-Cummings toolkit.

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "json.hpp"

#include "jcqed/config.hpp"
#include "jcqed/correlations.hpp"
#include "jcqed/dressed.hpp"
#include "jcqed/dynamics.hpp"
#include "jcqed/io.hpp"
#include "jcqed/presets.hpp"
#include "jcqed/quasiprob.hpp"
#include "jcqed/validation.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace jcqed;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Run {
  ScenarioConfig cfg;
  fs::path out;
  std::string stem;
  json meta;
  bool truncation_suspect = false;
};

Channel channel_of(const ScenarioConfig& c) { return c.channel == "forward" ? Channel::forward : Channel::side; }

std::vector<double> tau_grid(const ScenarioConfig& c, const ModelParams& p, double default_horizon) {
  const double horizon = c.tau_max > 0.0 ? c.tau_max : default_horizon;
  const double step = c.tau_step > 0.0 ? c.tau_step : default_delay_spacing(p);
  return delay_grid(horizon, step);
}

IntegratorOptions integrator(const ScenarioConfig& c) {
  IntegratorOptions o;
  o.rtol = c.rtol;
  o.atol = c.atol;
  return o;
}

SteadyContext solve(Run& run) {
  const ModelParams p = run.cfg.params();
  SteadyContext ctx;
  if (run.cfg.adaptive_n) {
    AdaptiveSteady a = prepare_steady_adaptive(p, p.n_max, 20, std::max(p.n_max, 400));
    json hist = json::array();
    for (const auto& [n, top] : a.history) hist.push_back({{"n_max", n}, {"top_population", top}});
    run.meta["adaptive_truncation"] = hist;
    run.meta["params"] = params_json(a.ctx.params());
    ctx = std::move(a.ctx);
  } else {
    ctx = prepare_steady(p);
  }
  const auto& s = ctx.steady;
  run.truncation_suspect = s.truncation_suspect;
  run.meta["steady_state"] = {{"method", s.method},
                              {"scaled_residual", s.scaled_residual},
                              {"generator_norm", s.generator_norm},
                              {"spectral_gap", s.spectral_gap},
                              {"top_fock_population", s.top_fock_population},
                              {"truncation_suspect", s.truncation_suspect},
                              {"min_eigenvalue", s.min_eigenvalue},
                              {"warnings", s.warnings}};
  return ctx;
}

void note_trace(Run& run, const CorrelationTrace& tr) {
  run.meta["trace"] = {{"quantity", tr.quantity},
                       {"channel", to_string(tr.channel)},
                       {"samples", tr.taus.size()},
                       {"normalization", tr.normalization},
                       {"coherent_plateau", tr.coherent_plateau},
                       {"frame", tr.frame_note},
                       {"extension", tr.extension},
                       {"max_imag_residue", tr.max_imag_residue},
                       {"steps_accepted", tr.stats.accepted},
                       {"steps_rejected", tr.stats.rejected},
                       {"warnings", tr.warnings}};
}

void task_steady(Run& run) {
  const SteadyContext ctx = solve(run);
  const OperatorSet& ops = ctx.ops();
  const DensityMatrix& rho = ctx.rho();
  const ModelParams& p = ctx.params();
  const cplx a = expectation(ops.a, rho);
  const cplx sm = expectation(ops.sm, rho);
  const double theta = 0.5 * kPi + p.drive_phase();
  run.meta["observables"] = {{"a_re", a.real()},
                             {"a_im", a.imag()},
                             {"sm_re", sm.real()},
                             {"sm_im", sm.imag()},
                             {"photon_number", expectation(ops.n_phot, rho).real()},
                             {"upper_population", expectation(ops.sp_sm, rho).real()},
                             {"squeezing_theta", theta},
                             {"squeezing_variance", quadrature_variance(ops, rho, theta)},
                             {"weak_drive_regime", weak_drive_regime(p)}};
  CsvTable t{"steady", {"n", "p_n", "p_upper_n", "p_lower_n"}, {}};
  const Basis& b = ops.basis;
  for (int n = 0; n <= p.n_max; ++n) {
    const double up = rho.matrix()(b.index(Atom::upper, n), b.index(Atom::upper, n)).real();
    const double lo = rho.matrix()(b.index(Atom::lower, n), b.index(Atom::lower, n)).real();
    t.add({static_cast<double>(n), up + lo, up, lo});
  }
  write_csv(run.out / (run.stem + ".csv"), t);
  std::cout << "photon number " << expectation(ops.n_phot, rho).real() << ", residual " << ctx.steady.scaled_residual
            << ", gap " << ctx.steady.spectral_gap << "\n";
  if (run.cfg.plot) {
    write_plot(run.out, run.stem, "set xlabel 'n'\nset ylabel 'P(n)'\nplot '" + run.stem + ".csv' using 1:2 skip 2 with impulses title 'P(n)'");
  }
}

void task_g1(Run& run) {
  const SteadyContext ctx = solve(run);
  const ModelParams& p = ctx.params();
  const Channel ch = channel_of(run.cfg);
  const auto taus = tau_grid(run.cfg, p, default_delay_horizon(p));
  const CorrelationTrace tr = first_order_correlation(ctx, taus, ch, integrator(run.cfg));
  note_trace(run, tr);
  CsvTable t{"g1", {"tau", "re_g1", "im_g1", "analytic_re", "analytic_im"}, {}};
  double dev = 0.0;
  for (std::size_t k = 0; k < taus.size(); ++k) {
    const cplx ana = ch == Channel::side ? g1_weak_drive(p, taus[k]) : cplx{kNaN, kNaN};
    if (ch == Channel::side) dev = std::max(dev, std::abs(tr.values[k] - ana));
    t.add({taus[k], tr.values[k].real(), tr.values[k].imag(), ana.real(), ana.imag()});
  }
  run.meta["max_deviation_from_analytic"] = ch == Channel::side ? json(dev) : json(nullptr);
  run.meta["weak_drive_regime"] = weak_drive_regime(p);
  write_csv(run.out / (run.stem + ".csv"), t);
  std::cout << "g1: " << taus.size() << " delays, coherent plateau " << tr.coherent_plateau;
  if (ch == Channel::side) std::cout << ", max deviation from weak-drive form " << dev;
  std::cout << "\n";
  if (run.cfg.plot) {
    write_plot(run.out, run.stem,
               "set xlabel 'kappa tau'\nplot '" + run.stem + ".csv' using 1:2 skip 2 with lines title 'Re g1', '' using 1:4 skip 2 with lines title 'weak drive'");
  }
}

void task_spectrum(Run& run) {
  const SteadyContext ctx = solve(run);
  const ModelParams& p = ctx.params();
  const Channel ch = channel_of(run.cfg);
  const auto taus = tau_grid(run.cfg, p, 30.0 / (p.kappa + 0.5 * p.gamma));
  const CorrelationTrace tr = first_order_correlation(ctx, taus, ch, integrator(run.cfg));
  note_trace(run, tr);
  std::vector<double> omegas = default_omega_grid(p);
  if (run.cfg.omega_step > 0.0 || run.cfg.omega_range > 0.0) {
    const double step = run.cfg.omega_step > 0.0 ? run.cfg.omega_step : 0.25 * p.doublet_halfwidth();
    const double range = run.cfg.omega_range > 0.0 ? run.cfg.omega_range : 1.5 * p.g;
    const auto n = static_cast<long>(std::ceil(range / step));
    omegas.clear();
    for (long k = -n; k <= n; ++k) omegas.push_back(static_cast<double>(k) * step);
  }
  const SpectrumResult sp = optical_spectrum(tr, omegas);
  CsvTable t{"spectrum", {"omega", "incoherent", "analytic_incoherent"}, {}};
  for (std::size_t j = 0; j < omegas.size(); ++j) {
    const double ana = ch == Channel::side ? spectrum_weak_drive(p, omegas[j]).incoherent : kNaN;
    t.add({omegas[j], sp.incoherent_density[j], ana});
  }
  run.meta["spectrum"] = {{"coherent_weight", sp.coherent_weight},
                          {"total", sp.total},
                          {"reference_total", sp.reference_total},
                          {"peaks", sp.peak_positions},
                          {"fit",
                           {{"amplitude", sp.fit.amplitude},
                            {"gamma", sp.fit.gamma},
                            {"center", sp.fit.center},
                            {"rms_residual", sp.fit.rms_residual},
                            {"converged", sp.fit.converged}}},
                          {"warnings", sp.warnings}};
  write_csv(run.out / (run.stem + ".csv"), t);
  std::cout << "spectrum: coherent weight " << sp.coherent_weight << ", fitted Gamma " << sp.fit.gamma << ", centre "
            << sp.fit.center << "\n";
  if (run.cfg.plot) {
    write_plot(run.out, run.stem,
               "set xlabel 'omega - omega0'\nplot '" + run.stem + ".csv' using 1:2 skip 2 with lines title 'numerical', '' using 1:3 skip 2 with lines title 'weak drive'");
  }
}

void task_g2(Run& run) {
  const SteadyContext ctx = solve(run);
  const ModelParams& p = ctx.params();
  const Channel ch = channel_of(run.cfg);
  const auto taus = tau_grid(run.cfg, p, default_delay_horizon(p));
  const CorrelationTrace tr = intensity_correlation(ctx, ch, taus, integrator(run.cfg));
  note_trace(run, tr);
  CsvTable t{"g2", {"tau", "g2", "weak_drive", "pure_state"}, {}};
  double dev = 0.0;
  for (std::size_t k = 0; k < taus.size(); ++k) {
    const bool side = ch == Channel::side;
    const double w = side ? g2_weak_drive(p, taus[k]) : kNaN;
    const double ps = side ? g2_pure_state(p, taus[k]).value : kNaN;
    if (side) dev = std::max(dev, std::abs(tr.values[k].real() - w));
    t.add({taus[k], tr.values[k].real(), w, ps});
  }
  run.meta["g2_zero"] = tr.values.front().real();
  run.meta["max_deviation_from_analytic"] = ch == Channel::side ? json(dev) : json(nullptr);
  if (ch == Channel::forward) run.meta["forward_zero_delay_estimate"] = g2_forward_zero_delay(p);
  write_csv(run.out / (run.stem + ".csv"), t);
  std::cout << "g2(0) = " << tr.values.front().real() << ", g2(horizon) = " << tr.values.back().real() << "\n";
  if (run.cfg.plot) {
    write_plot(run.out, run.stem,
               "set xlabel 'kappa tau'\nplot '" + run.stem + ".csv' using 1:2 skip 2 with lines title 'g2', '' using 1:3 skip 2 with lines title 'weak drive'");
  }
}

void task_wtd(Run& run) {
  const SteadyContext ctx = solve(run);
  const ModelParams& p = ctx.params();
  const Channel ch = channel_of(run.cfg);
  const auto taus = tau_grid(run.cfg, p, default_wtd_horizon(p));
  const CorrelationTrace tr = waiting_time_distribution(ctx, taus, ch, integrator(run.cfg));
  note_trace(run, tr);
  const bool ref_ok = ch == Channel::side && p.gamma > 0.0;
  ResonanceFluorescenceRef ref;
  if (ref_ok) ref = resonance_fluorescence_reference(p, expectation(ctx.ops().a, ctx.rho()));
  CsvTable t{"wtd", {"tau", "w", "reference"}, {}};
  for (std::size_t k = 0; k < taus.size(); ++k) {
    const double r = ref_ok && ref.Y > 0.0 ? wtd_resonance_fluorescence(ref, p.gamma, taus[k]).value : kNaN;
    t.add({taus[k], tr.values[k].real(), r});
  }
  run.meta["waiting_times"] = {{"integral", tr.integral}, {"mean", tr.mean}, {"tail_mass", tr.tail_mass}, {"tail_rate", tr.tail_rate}};
  if (ref_ok) {
    run.meta["reference"] = {{"Y", ref.Y}, {"mean", ref.tau_av}, {"sign_applied", -1}, {"note", "literal bracket negated for a non-negative density"}};
  }
  write_csv(run.out / (run.stem + ".csv"), t);
  std::cout << "waiting times: integral " << tr.integral << ", mean " << tr.mean << "\n";
  if (run.cfg.plot) {
    write_plot(run.out, run.stem,
               "set xlabel 'tau'\nplot '" + run.stem + ".csv' using 1:2 skip 2 with lines title 'w', '' using 1:3 skip 2 with lines title 'reference'");
  }
}

QGridSpec qspec(const ScenarioConfig& c, const ModelParams& p) {
  if (c.q_half_width > 0.0) return QGridSpec::square(c.q_half_width, c.q_points);
  QGridSpec s = default_qgrid(p);
  s.nx = s.ny = c.q_points;
  return s;
}

void task_qfunc(Run& run) {
  const SteadyContext ctx = solve(run);
  const ModelParams& p = ctx.params();
  const QGrid q = husimi_q(ctx.rho(), qspec(run.cfg, p));
  json info = qgrid_json(q);
  info["mirror_asymmetry"] = mirror_asymmetry(q);
  info["maxwell_bloch_amplitude"] = maxwell_bloch_amplitude(p);
  run.meta["qfunc"] = info;
  write_csv(run.out / (run.stem + ".csv"), qgrid_table(q));
  CsvTable peaks{"qpeaks", {"x", "y", "height"}, {}};
  for (const auto& pk : q.peaks) peaks.add({pk.x, pk.y, pk.height});
  write_csv(run.out / (run.stem + "_peaks.csv"), peaks);
  std::cout << q.peaks.size() << " peaks:";
  for (const auto& pk : q.peaks) std::cout << " (" << pk.x << ", " << pk.y << ")";
  std::cout << "\n";
  if (run.cfg.plot) {
    write_plot(run.out, run.stem,
               "set view map\nset size ratio -1\nset dgrid3d " + std::to_string(q.spec.ny) + "," + std::to_string(q.spec.nx) +
                   "\nsplot '" + run.stem + ".csv' using 1:2:3 skip 2 with pm3d notitle");
  }
}

void task_evolve(Run& run) {
  const ModelParams p = run.cfg.params();
  const auto times = snapshot_times(p, run.cfg.gt_max, run.cfg.snapshots);
  const TransientResult tr = transient_snapshots(p, times, qspec(run.cfg, p), run.cfg.rtol, run.cfg.atol);
  CsvTable summary{"evolve", {"index", "t", "gT", "peaks", "q_integral"}, {}};
  json frames = json::array();
  for (std::size_t k = 0; k < tr.frames.size(); ++k) {
    const QGrid& q = tr.frames[k];
    char name[32];
    std::snprintf(name, sizeof name, "_q%02zu.csv", k);
    write_csv(run.out / (run.stem + name), qgrid_table(q));
    summary.add({static_cast<double>(k), q.time, p.g * q.time, static_cast<double>(q.peaks.size()), q.integral});
    frames.push_back(qgrid_json(q));
  }
  CsvTable curve{"neoclassical", {"x", "y"}, {}};
  for (const auto& [x, y] : tr.curve.polygon()) curve.add({x, y});
  write_csv(run.out / (run.stem + ".csv"), summary);
  write_csv(run.out / (run.stem + "_curve.csv"), curve);
  run.meta["frames"] = frames;
  run.meta["max_trace_drift"] = tr.max_trace_drift;
  run.meta["warnings"] = tr.warnings;
  std::cout << tr.frames.size() << " snapshots written\n";
  if (run.cfg.plot) {
    write_plot(run.out, run.stem,
               "set size ratio -1\nplot '" + run.stem + "_curve.csv' using 1:2 skip 2 with lines title 'neoclassical curve'");
  }
}

int task_validate(Run& run, const std::vector<int>& which) {
  ValidationSession session;
  json results = json::array();
  bool all = true;
  std::vector<int> ids = which;
  if (ids.empty())
    for (int i = 1; i <= kCriterionCount; ++i) ids.push_back(i);
  for (int id : ids) {
    const CriterionResult r = run_criterion(id, session);
    std::cout << summary_line(r) << "\n";
    for (const auto& d : r.details) std::cout << "    " << d << "\n";
    std::cout.flush();
    results.push_back({{"id", r.id}, {"title", r.title}, {"passed", r.passed}, {"details", r.details}, {"seconds", r.seconds}});
    all = all && r.passed;
  }
  run.meta["criteria"] = results;
  run.meta["all_passed"] = all;
  return all || !run.cfg.strict ? 0 : 2;
}

void emit_error(const char* type, const std::string& msg) {
  std::cerr << json{{"error", {{"type", type}, {"message", msg}}}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Driven, damped Jaynes-Cummings oscillator: steady states, correlations, phase space"};
  std::string task;
  std::string name;
  std::string preset;
  std::string panel;
  std::vector<std::string> params;
  std::string config_file;
  std::string out_dir = "jc_out";
  bool strict = false;
  bool plot = false;
  std::vector<int> criteria;
  app.add_option("task", task, "steady | g1 | spectrum | g2 | wtd | qfunc | evolve | validate | run")->required();
  app.add_option("name", name, "preset name (with `run`)");
  app.add_option("--preset", preset, "preset name");
  app.add_option("--panel", panel, "fig4 panel, I-a .. II-d");
  app.add_option("--param", params, "override k=v (repeatable)");
  app.add_option("--config", config_file, "key = value file, or a JSON metadata file from an earlier run");
  app.add_option("--out", out_dir, "output directory");
  app.add_flag("--strict", strict, "nonzero exit on truncation-suspect results");
  app.add_flag("--plot", plot, "write gnuplot scripts (rendered when gnuplot is available)");
  app.add_option("--criterion", criteria, "validate: run only these criteria");
  CLI11_PARSE(app, argc, argv);

  if (const char* env = std::getenv("JC_NUM_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) {
      Eigen::setNbThreads(n);
#ifdef _OPENMP
      omp_set_num_threads(n);
#endif
    }
  }

  try {
    KeyValues cli = parse_overrides(params);
    if (task == "run") {
      if (name.empty()) detail::fail_domain("`run` needs a preset name or `validate`");
      if (name == "validate") {
        cli["task"] = "validate";
      } else {
        cli["preset"] = name;
      }
    } else {
      if (!name.empty()) detail::fail_domain("unexpected argument '" + name + "'");
      cli["task"] = task;
    }
    if (!preset.empty()) cli["preset"] = preset;
    if (!panel.empty()) cli["panel"] = panel;
    if (strict) cli["strict"] = "true";
    if (plot) cli["plot"] = "true";
    const KeyValues file = config_file.empty() ? KeyValues{} : load_config_file(config_file);

    Run run;
    run.cfg = resolve_config(file, cli);
    run.out = out_dir;
    fs::create_directories(run.out);
    run.stem = run.cfg.preset.empty() ? run.cfg.task : run.cfg.preset + (run.cfg.panel.empty() ? "" : "_" + run.cfg.panel);
    if (run.cfg.task == "validate") run.stem = "validate";
    run.meta = run_metadata(run.cfg);

    int code = 0;
    const std::string& t = run.cfg.task;
    if (t == "steady") task_steady(run);
    else if (t == "g1") task_g1(run);
    else if (t == "spectrum") task_spectrum(run);
    else if (t == "g2") task_g2(run);
    else if (t == "wtd") task_wtd(run);
    else if (t == "qfunc") task_qfunc(run);
    else if (t == "evolve") task_evolve(run);
    else code = task_validate(run, criteria);

    write_json(run.out / (run.stem + ".json"), run.meta);
    if (run.truncation_suspect) {
      if (run.cfg.strict) {
        emit_error("numerical", "truncation suspect: top Fock levels are populated; raise n_max or set adaptive_n");
        return 2;
      }
      std::cerr << "warning: truncation suspect; raise n_max or set adaptive_n\n";
    }
    return code;
  } catch (const DomainError& e) {
    emit_error("domain", e.what());
    return 1;
  } catch (const NumericalError& e) {
    emit_error("numerical", e.what());
    return 2;
  } catch (const std::exception& e) {
    emit_error("domain", e.what());
    return 1;
  }
}
