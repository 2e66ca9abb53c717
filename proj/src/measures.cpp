#include <algorithm>

#include "netdyn/orbit.hpp"
#include "netdyn/parallel.hpp"

namespace netdyn {

const char* to_string(SystemClass c) {
  switch (c) {
    case SystemClass::AeStable: return "ae-stable";
    case SystemClass::AeChaotic: return "ae-chaotic";
    case SystemClass::Combined: return "combined";
    case SystemClass::Indeterminate: return "indeterminate";
  }
  return "?";
}

SystemClass classify_system(double frac_stable, double frac_chaotic, double frac_undecided) {
  constexpr double kUndecidedCap = 0.01;
  if (frac_chaotic == 0.0 && frac_undecided < kUndecidedCap) return SystemClass::AeStable;
  if (frac_stable == 0.0 && frac_undecided < kUndecidedCap) return SystemClass::AeChaotic;
  if (frac_stable > 0.0 && frac_chaotic > 0.0) return SystemClass::Combined;
  return SystemClass::Indeterminate;
}

MeasureReport estimate_measures(const Network& net, const MeasureOptions& opts) {
  if (opts.samples == 0) throw std::invalid_argument("estimate_measures: samples must be >= 1");
  MeasureReport report;
  report.samples = opts.samples;
  const auto calib = calibrate_margin(net, opts.seed);
  report.options = classify_options(net, calib, opts.budget, opts.delta_fraction);

  report.starts.resize(opts.samples);
  report.verdicts.resize(opts.samples);
  const std::size_t threads = worker_count(opts.threads, opts.samples);
  parallel_for(opts.samples, threads, [&](std::size_t i) {
    Rng rng(opts.seed, i);
    report.starts[i] = random_section_state(net, rng);
    report.verdicts[i] = classify_point(net, SectionPoint(net, report.starts[i]), report.options);
  });

  std::size_t stable = 0, chaotic = 0, undecided = 0, contact = 0;
  report.cycle_of.assign(opts.samples, -1);
  for (std::size_t i = 0; i < opts.samples; ++i) {
    const auto& v = report.verdicts[i];
    if (v.boundary_contact) ++contact;
    switch (v.kind) {
      case VerdictKind::Stable: ++stable; break;
      case VerdictKind::Chaotic: ++chaotic; break;
      case VerdictKind::Undecided: ++undecided; break;
    }
    if (v.kind != VerdictKind::Stable) continue;
    auto it = std::find_if(report.cycles.begin(), report.cycles.end(),
                           [&](const CycleTally& t) { return same_cycle(t.cycle, *v.cycle); });
    if (it == report.cycles.end()) {
      report.cycles.push_back(CycleTally{*v.cycle, 0});
      it = report.cycles.end() - 1;
    }
    ++it->hits;
    report.cycle_of[i] = it - report.cycles.begin();
  }
  const auto total = static_cast<double>(opts.samples);
  report.frac_stable = stable / total;
  report.frac_chaotic = chaotic / total;
  report.frac_undecided = undecided / total;
  report.frac_boundary_contact = contact / total;
  report.system_class =
      classify_system(report.frac_stable, report.frac_chaotic, report.frac_undecided);
  return report;
}

}  // namespace netdyn
