#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "netdyn/atoms.hpp"
#include "netdyn/config.hpp"
#include "netdyn/orbit.hpp"
#include "netdyn/parallel.hpp"

namespace netdyn {

namespace {

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <class T>
std::string num(T x) requires std::is_integral_v<T> {
  return std::to_string(x);
}

std::string word_string(const std::vector<NeuronSet>& word) {
  std::string s;
  for (const auto& w : word) s += format_set(w);
  return s;
}

std::string letters(const std::vector<std::uint32_t>& word) {
  std::string s;
  for (std::size_t k = 0; k < word.size(); ++k) {
    if (k) s += '.';
    s += std::to_string(word[k] + 1);
  }
  return s.empty() ? "-" : s;
}

std::string vec_string(const State& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) s += ',';
    s += num(v[k]);
  }
  return s;
}

/// A table written as TSV with a header, or as tab-separated key:value records.
class Sheet {
 public:
  explicit Sheet(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void state_columns(std::size_t n) {
    for (std::size_t k = 1; k <= n; ++k) columns_.push_back("v" + std::to_string(k));
  }
  void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }
  std::size_t rows() const { return rows_.size(); }

  void write(const std::string& path, OutputFormat format) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    if (format == OutputFormat::Table) {
      line(out, columns_);
      for (const auto& r : rows_) line(out, r);
    } else {
      for (const auto& r : rows_) {
        for (std::size_t c = 0; c < r.size(); ++c) {
          if (c) out << '\t';
          out << columns_[c] << ':' << r[c];
        }
        out << '\n';
      }
    }
  }

 private:
  static void line(std::ostream& out, const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c) out << '\t';
      out << cells[c];
    }
    out << '\n';
  }

  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

/// Ordered key:value lines of <prefix>.summary.txt.
class Summary {
 public:
  void add(const std::string& key, const std::string& value) { lines_.emplace_back(key, value); }
  void write(const std::string& path, std::ostream& echo) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    for (const auto& [k, v] : lines_) {
      out << k << ':' << v << '\n';
      echo << k << ": " << v << '\n';
    }
  }

 private:
  std::vector<std::pair<std::string, std::string>> lines_;
};

void append_state(std::vector<std::string>& row, const State& v) {
  for (double x : v) row.push_back(num(x));
}

Sheet cycle_sheet(std::size_t n) {
  Sheet s({"cycle", "period", "position", "winners", "residual", "floquet_bound", "min_margin",
           "hits"});
  s.state_columns(n);
  return s;
}

void add_cycle(Sheet& sheet, std::size_t id, const Cycle& c, std::size_t hits) {
  for (std::size_t k = 0; k < c.period; ++k) {
    std::vector<std::string> row{num(id),         num(c.period),        num(k),
                                 format_set(c.word[k]), num(c.residual), num(c.floquet_bound),
                                 num(c.min_margin), num(hits)};
    append_state(row, c.states[k]);
    sheet.add(std::move(row));
  }
}

std::uint64_t need_seed(const RunConfig& cfg) {
  if (!cfg.seed) {
    throw ConfigError(std::string("command '") + to_string(*cfg.command) +
                      "' samples the section and needs a seed (config key 'seed' or --seed)");
  }
  return *cfg.seed;
}

void run_constants(const RunConfig& cfg, const Network& net, Summary& sum) {
  const auto c = system_constants(net);
  sum.add("n", num(net.size()));
  sum.add("theta", num(net.theta()));
  sum.add("alpha", num(c.alpha));
  sum.add("eps0", num(c.eps0));
  sum.add("t0", num(c.t0));
  sum.add("lambda", num(c.lambda));
  sum.add("gamma_min", num(c.gamma_min));
  sum.add("f_max", num(c.f_max));
  sum.add("k_diam", num(c.k_diam));
  if (cfg.seed) {
    const double k = norm_equivalence_probe(net, 64, 64, *cfg.seed);
    sum.add("k_probe", num(k));
    sum.add("p0", num(contraction_iterate(k, c.lambda)));
  }
}

void run_simulate(const RunConfig& cfg, const Network& net, Summary& sum) {
  State start;
  if (cfg.start) {
    start = *cfg.start;
  } else {
    Rng rng(need_seed(cfg), 0);
    start = random_section_state(net, rng);
  }
  SectionPoint v0 = [&] {
    try {
      return SectionPoint(net, start);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("start: ") + e.what());
    }
  }();
  const auto orbit = iterate_orbit(net, v0, cfg.budgets.steps);

  Sheet sheet({"step", "winners", "tbar", "margin"});
  sheet.state_columns(net.size());
  for (std::size_t k = 0; k < orbit.steps(); ++k) {
    std::vector<std::string> row{num(k), format_set(orbit.winners[k]), num(orbit.isi[k]),
                                 num(orbit.margins[k])};
    append_state(row, orbit.states[k]);
    sheet.add(std::move(row));
  }
  sheet.write(cfg.out_prefix + ".orbit.tsv", cfg.format);

  sum.add("start", vec_string(orbit.start));
  sum.add("steps", num(orbit.steps()));
  sum.add("clamp_events", num(orbit.clamp_events));
  sum.add("hit_boundary", orbit.hit_boundary ? "true" : "false");
  sum.add("final_state", vec_string(orbit.states.back()));
  if (auto cand = detect_cycle(orbit, net.tol().recurrence)) {
    try {
      const auto c = canonical_rotation(refine_cycle(net, *cand));
      sum.add("cycle_period", num(c.period));
      sum.add("cycle_word", word_string(c.word));
      sum.add("cycle_residual", num(c.residual));
      sum.add("cycle_entry_step", num(cand->anchor_index));
    } catch (const CycleRejected& e) {
      sum.add("cycle", std::string("rejected: ") + e.what());
    }
  } else {
    sum.add("cycle", "none detected");
  }
}

void run_measures(const RunConfig& cfg, const Network& net, Summary& sum, bool per_sample) {
  MeasureOptions opts;
  opts.samples = cfg.budgets.samples;
  opts.seed = need_seed(cfg);
  opts.budget = cfg.budgets.steps;
  opts.delta_fraction = cfg.delta_fraction;
  const auto report = estimate_measures(net, opts);

  Sheet cycles = cycle_sheet(net.size());
  for (std::size_t c = 0; c < report.cycles.size(); ++c) {
    add_cycle(cycles, c, report.cycles[c].cycle, report.cycles[c].hits);
  }
  cycles.write(cfg.out_prefix + ".cycles.tsv", cfg.format);

  if (per_sample) {
    Sheet sheet({"sample", "verdict", "cycle", "steps", "convergence_step", "min_margin",
                 "residual", "boundary_contact", "probe_divergence", "certified_delta"});
    sheet.state_columns(net.size());
    for (std::size_t i = 0; i < report.samples; ++i) {
      const auto& v = report.verdicts[i];
      std::vector<std::string> row{num(i),
                                   to_string(v.kind),
                                   report.cycle_of[i] < 0 ? "-" : num(report.cycle_of[i]),
                                   num(v.steps),
                                   num(v.convergence_step),
                                   num(v.min_margin),
                                   num(v.residual),
                                   v.boundary_contact ? "1" : "0",
                                   v.probe_divergence ? "1" : "0",
                                   num(v.certified_delta)};
      append_state(row, report.starts[i]);
      sheet.add(std::move(row));
    }
    sheet.write(cfg.out_prefix + ".classify.tsv", cfg.format);
  }

  sum.add("samples", num(report.samples));
  sum.add("seed", num(opts.seed));
  sum.add("budget", num(opts.budget));
  sum.add("alpha", num(report.options.alpha));
  sum.add("delta", num(report.options.delta));
  sum.add("delta_floor", num(report.options.delta_floor));
  sum.add("margin_threshold", num(report.options.margin_threshold));
  sum.add("frac_stable", num(report.frac_stable));
  sum.add("frac_chaotic", num(report.frac_chaotic));
  sum.add("frac_undecided", num(report.frac_undecided));
  sum.add("frac_boundary_contact", num(report.frac_boundary_contact));
  sum.add("cycles", num(report.cycles.size()));
  sum.add("system_class", to_string(report.system_class));
}

void run_atoms(const RunConfig& cfg, const Network& net, Summary& sum) {
  const std::uint64_t seed = need_seed(cfg);
  auto cloud = sample_section(net, cfg.budgets.samples, seed);
  const auto calib = calibrate_margin(net, seed);
  const auto opts = classify_options(net, calib, cfg.budgets.steps, cfg.delta_fraction);

  AtomRefinery refinery(net, cloud.points, worker_count(0, cloud.points.size()));
  Sheet sheet({"generation", "atom", "word", "members", "diameter", "min_margin", "indivisible"});
  std::optional<std::vector<Atom>> settled;
  std::size_t settled_at = 0;
  std::vector<Atom> last;
  for (std::size_t p = 1; p <= cfg.budgets.generations; ++p) {
    refinery.advance();
    if (refinery.survivors() == 0) {
      throw NumericalFailure("every sample was discarded at a tie by generation " +
                             std::to_string(p));
    }
    last = refinery.atoms();
    bool all_indivisible = true;
    for (std::size_t a = 0; a < last.size(); ++a) {
      const bool ind = indivisibility_check(last[a], opts.margin_threshold);
      all_indivisible = all_indivisible && ind;
      sheet.add({num(p), num(a), letters(last[a].word), num(last[a].members.size()),
                 num(last[a].diameter), num(last[a].min_margin), ind ? "1" : "0"});
    }
    if (all_indivisible && refinery.max_diameter() < 0.5 * opts.delta && !settled) {
      settled = last;
      settled_at = p;
    }
  }
  sheet.write(cfg.out_prefix + ".atoms.tsv", cfg.format);

  sum.add("samples", num(cloud.points.size()));
  sum.add("resamples", num(cloud.resamples));
  sum.add("seed", num(seed));
  sum.add("generations", num(cfg.budgets.generations));
  sum.add("survivors", num(refinery.survivors()));
  sum.add("discarded", num(refinery.discarded()));
  sum.add("margin_threshold", num(opts.margin_threshold));
  sum.add("final_atoms", num(last.size()));
  sum.add("final_max_diameter", num(refinery.max_diameter()));
  Sheet cycles = cycle_sheet(net.size());
  if (!settled) {
    // Divisible atoms straddle ties; chains built from them would be meaningless.
    sum.add("indivisible_generation", "none");
    sum.add("note", "atoms not all indivisible within the generation cap; "
                    "raise generations or lower delta to extract chains");
    cycles.write(cfg.out_prefix + ".cycles.tsv", cfg.format);
    sum.add("loops", "0");
    sum.add("cycles", "0");
    return;
  }
  sum.add("indivisible_generation", num(settled_at));
  const auto report = extract_chains(net, *settled);
  sum.add("chain_atoms", num(settled->size()));
  sum.add("loops", num(report.loops.size()));
  sum.add("stray_members", num(report.stray_members));
  for (std::size_t l = 0; l < report.loops.size(); ++l) {
    const auto& loop = report.loops[l];
    std::string ids;
    for (auto a : loop.atoms) ids += (ids.empty() ? "" : ",") + std::to_string(a);
    sum.add("loop" + std::to_string(l),
            "atoms=" + ids + " basin_atoms=" + num(loop.basin_atoms) +
                " inclusion_gap=" + num(loop.inclusion_gap));
  }
  for (const auto& note : report.notes) sum.add("note", note);

  for (std::size_t c = 0; c < report.cycles.size(); ++c) {
    add_cycle(cycles, c, report.cycles[c], report.loops.size() > c ? report.loops[c].basin_atoms : 0);
  }
  cycles.write(cfg.out_prefix + ".cycles.tsv", cfg.format);
  sum.add("cycles", num(report.cycles.size()));
}

}  // namespace

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (!cfg.command) {
    err << "netdyn: no command given\n";
    return kExitConfig;
  }
  try {
    const Network net(cfg.params);
    Summary sum;
    sum.add("command", to_string(*cfg.command));
    switch (*cfg.command) {
      case Command::Constants: run_constants(cfg, net, sum); break;
      case Command::Simulate: run_simulate(cfg, net, sum); break;
      case Command::Cycles: run_measures(cfg, net, sum, false); break;
      case Command::Classify: run_measures(cfg, net, sum, true); break;
      case Command::Atoms: run_atoms(cfg, net, sum); break;
    }
    sum.write(cfg.out_prefix + ".summary.txt", out);
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "netdyn: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ParamError& e) {
    err << "netdyn: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "netdyn: numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace netdyn
