#include "netdyn/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

namespace netdyn {

std::optional<Command> parse_command(std::string_view name) {
  if (name == "simulate") return Command::Simulate;
  if (name == "cycles") return Command::Cycles;
  if (name == "classify") return Command::Classify;
  if (name == "atoms") return Command::Atoms;
  if (name == "constants") return Command::Constants;
  return std::nullopt;
}

const char* to_string(Command c) {
  switch (c) {
    case Command::Simulate: return "simulate";
    case Command::Cycles: return "cycles";
    case Command::Classify: return "classify";
    case Command::Atoms: return "atoms";
    case Command::Constants: return "constants";
  }
  return "?";
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

struct Entry {
  std::string key;
  std::string value;
  int line = 0;
};

[[noreturn]] void fail(int line, std::string_view key, const std::string& what) {
  std::ostringstream msg;
  msg << "line " << line;
  if (!key.empty()) msg << ", key '" << key << "'";
  msg << ": " << what;
  throw ConfigError(msg.str());
}

double to_double(const Entry& e, std::string_view token) {
  double x = 0.0;
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, x);
  if (ec != std::errc() || ptr != end) {
    fail(e.line, e.key, "'" + std::string(token) + "' is not a number");
  }
  return x;
}

std::uint64_t to_count(const Entry& e) {
  const auto token = trim(e.value);
  std::uint64_t x = 0;
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, x);
  if (ec != std::errc() || ptr != end) {
    fail(e.line, e.key, "'" + std::string(token) + "' is not a non-negative integer");
  }
  return x;
}

std::vector<double> to_vector(const Entry& e) {
  std::vector<double> out;
  std::string flat = e.value;
  std::replace(flat.begin(), flat.end(), ',', ' ');
  std::replace(flat.begin(), flat.end(), ';', ' ');
  std::istringstream in(flat);
  std::string token;
  while (in >> token) out.push_back(to_double(e, token));
  if (out.empty()) fail(e.line, e.key, "expected at least one number");
  return out;
}

// Row lengths of a ';'-separated matrix, empty if written as one flat list.
std::vector<std::size_t> row_lengths(const Entry& e) {
  std::vector<std::size_t> rows;
  if (e.value.find(';') == std::string::npos) return rows;
  std::istringstream in(e.value);
  std::string row;
  while (std::getline(in, row, ';')) {
    std::replace(row.begin(), row.end(), ',', ' ');
    std::istringstream cells(row);
    std::string token;
    std::size_t count = 0;
    while (cells >> token) ++count;
    rows.push_back(count);
  }
  return rows;
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  static const std::set<std::string> kNetworkKeys = {"n", "theta", "gamma", "beta", "h", "seed"};
  static const std::set<std::string> kRunKeys = {"command",     "steps", "samples", "generations",
                                                 "delta",       "start", "format",  "out"};
  static const std::set<std::string> kTolKeys = {"root", "simultaneity", "recurrence",
                                                 "boundary"};

  std::vector<Entry> entries;
  std::set<std::string> seen;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "", "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section != "run" && section != "tolerances") {
        fail(line_no, "", "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(line_no, "", "expected 'key = value'");
    Entry e{std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))),
            line_no};
    const auto& allowed = section.empty() ? kNetworkKeys
                          : section == "run" ? kRunKeys
                                             : kTolKeys;
    if (!allowed.count(e.key)) {
      fail(line_no, e.key,
           "unknown key" + (section.empty() ? std::string() : " in [" + section + "]"));
    }
    const auto qualified = section + "." + e.key;
    if (!seen.insert(qualified).second) fail(line_no, e.key, "duplicate key");
    if (e.value.empty()) fail(line_no, e.key, "missing value");
    e.key = qualified;
    entries.push_back(std::move(e));
  }

  auto find = [&](const std::string& key) -> const Entry* {
    for (const auto& e : entries) {
      if (e.key == key) return &e;
    }
    return nullptr;
  };
  auto require = [&](const std::string& key) -> const Entry& {
    const Entry* e = find("." + key);
    if (!e) fail(line_no, key, "required key is missing");
    return *e;
  };

  RunConfig cfg;
  auto& p = cfg.params;
  {
    const Entry& e = require("n");
    p.n = static_cast<std::size_t>(to_count(e));
    if (p.n < 2) fail(e.line, "n", "n must be at least 2");
  }
  {
    const Entry& e = require("theta");
    p.theta = to_double(e, trim(e.value));
  }
  auto sized = [&](const std::string& key, std::size_t expected) {
    const Entry& e = require(key);
    auto v = to_vector(e);
    if (v.size() != expected) {
      fail(e.line, key,
           "dimension mismatch: expected " + std::to_string(expected) + " values, got " +
               std::to_string(v.size()));
    }
    return v;
  };
  p.gamma = sized("gamma", p.n);
  p.beta = sized("beta", p.n);
  {
    const Entry& e = require("h");
    for (auto len : row_lengths(e)) {
      if (len != p.n) {
        fail(e.line, "h", "dimension mismatch: every row needs " + std::to_string(p.n) +
                              " values, got a row of " + std::to_string(len));
      }
    }
    p.h = sized("h", p.n * p.n);
  }
  if (const Entry* e = find(".seed")) cfg.seed = to_count(*e);

  if (const Entry* e = find("run.command")) {
    cfg.command = parse_command(trim(e->value));
    if (!cfg.command) fail(e->line, "command", "unknown command '" + e->value + "'");
  }
  auto budget = [&](const char* key, std::size_t& slot) {
    if (const Entry* e = find(std::string("run.") + key)) {
      slot = static_cast<std::size_t>(to_count(*e));
      if (slot == 0) fail(e->line, key, "budgets must be positive");
    }
  };
  budget("steps", cfg.budgets.steps);
  budget("samples", cfg.budgets.samples);
  budget("generations", cfg.budgets.generations);
  if (const Entry* e = find("run.delta")) {
    cfg.delta_fraction = to_double(*e, trim(e->value));
    if (!(cfg.delta_fraction > 0.0 && cfg.delta_fraction < 1.0)) {
      fail(e->line, "delta", "delta is a fraction of alpha and must lie in (0, 1)");
    }
  }
  if (const Entry* e = find("run.start")) {
    auto v = to_vector(*e);
    if (v.size() != p.n) {
      fail(e->line, "start", "dimension mismatch: expected " + std::to_string(p.n) +
                                 " values, got " + std::to_string(v.size()));
    }
    cfg.start = std::move(v);
  }
  if (const Entry* e = find("run.format")) {
    if (e->value == "table") {
      cfg.format = OutputFormat::Table;
    } else if (e->value == "records") {
      cfg.format = OutputFormat::Records;
    } else {
      fail(e->line, "format", "expected 'table' or 'records'");
    }
  }
  if (const Entry* e = find("run.out")) cfg.out_prefix = e->value;

  auto tol = [&](const char* key, double& slot) {
    if (const Entry* e = find(std::string("tolerances.") + key)) {
      slot = to_double(*e, trim(e->value));
      if (!(slot > 0.0)) fail(e->line, key, "tolerances must be positive");
    }
  };
  tol("root", p.tol.root);
  tol("simultaneity", p.tol.simultaneity);
  tol("recurrence", p.tol.recurrence);
  tol("boundary", p.tol.boundary);

  try {
    p = validate_params(std::move(p));
  } catch (const ParamError& err) {
    throw ConfigError(std::string("invalid network: ") + err.what());
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

}  // namespace netdyn
