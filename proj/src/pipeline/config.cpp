#include "sf/pipeline/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace sf {

namespace {

std::string trim(std::string_view s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string_view::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return std::string(s.substr(a, b - a + 1));
}

[[noreturn]] void bad(const std::string& msg, SourceLoc loc) { throw Error("config", msg, loc); }

std::string unquote(const std::string& v, SourceLoc loc) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
  bad("expected a quoted string, got '" + v + "'", loc);
}

std::vector<std::string> list_items(const std::string& v, SourceLoc loc) {
  if (v.size() < 2 || v.front() != '[' || v.back() != ']') bad("expected a list, got '" + v + "'", loc);
  std::vector<std::string> out;
  std::stringstream ss(v.substr(1, v.size() - 2));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) bad("empty list item", loc);
    out.push_back(item);
  }
  return out;
}

double number(const std::string& v, SourceLoc loc) {
  double out = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) bad("expected a number, got '" + v + "'", loc);
  return out;
}

long integer(const std::string& v, SourceLoc loc) {
  long out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) bad("expected an integer, got '" + v + "'", loc);
  return out;
}

bool boolean(const std::string& v, SourceLoc loc) {
  if (v == "true") return true;
  if (v == "false") return false;
  bad("expected true or false, got '" + v + "'", loc);
}

std::string num_text(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

void apply_setting(PipelineConfig& c, const std::string& key, const std::string& raw, SourceLoc loc) {
  const std::string v = trim(raw);
  if (v.empty()) bad("missing value for '" + key + "'", loc);
  if (key == "domain") {
    if (v == "\"default\"") {
      c.domain = {kDefaultDomain.ni, kDefaultDomain.nj, kDefaultDomain.nk, c.domain.west, c.domain.east,
                  c.domain.south, c.domain.north};
      return;
    }
    if (v == "\"fallback\"") {
      c.domain = {kFallbackDomain.ni, kFallbackDomain.nj, kFallbackDomain.nk, c.domain.west, c.domain.east,
                  c.domain.south, c.domain.north};
      return;
    }
    const auto items = list_items(v, loc);
    if (items.size() != 3) bad("domain needs three sizes", loc);
    c.domain.ni = int(integer(items[0], loc));
    c.domain.nj = int(integer(items[1], loc));
    c.domain.nk = int(integer(items[2], loc));
  } else if (key == "owned") {
    c.domain.west = c.domain.east = c.domain.south = c.domain.north = false;
    for (const auto& item : list_items(v, loc)) {
      const std::string e = unquote(item, loc);
      if (e == "west")
        c.domain.west = true;
      else if (e == "east")
        c.domain.east = true;
      else if (e == "south")
        c.domain.south = true;
      else if (e == "north")
        c.domain.north = true;
      else
        bad("unknown edge '" + e + "'", loc);
    }
  } else if (key == "workers") {
    c.workers = int(integer(v, loc));
  } else if (key == "alignment") {
    c.alignment = int(integer(v, loc));
  } else if (key == "tiles") {
    c.tiles.clear();
    for (const auto& item : list_items(v, loc)) c.tiles.push_back(int(integer(item, loc)));
  } else if (key == "m") {
    c.m = int(integer(v, loc));
  } else if (key == "gain") {
    c.gain = number(v, loc);
  } else if (key == "l_max") {
    c.l_max = int(integer(v, loc));
  } else if (key == "depth") {
    c.depth = int(integer(v, loc));
  } else if (key == "reps") {
    c.reps = int(integer(v, loc));
  } else if (key == "seed") {
    const long s = integer(v, loc);
    if (s < 0) bad("seed must be non-negative", loc);
    c.seed = std::uint64_t(s);
  } else if (key == "noise_margin") {
    c.noise_margin = number(v, loc);
  } else if (key == "model_cost") {
    c.model_cost = boolean(v, loc);
  } else if (key == "bandwidth") {
    c.bandwidth = number(v, loc);
  } else if (key == "tuning_module") {
    c.tuning_module = unquote(v, loc);
  } else if (key == "version") {
    if (integer(v, loc) != PipelineConfig::kVersion) bad("unsupported config version " + v, loc);
  } else {
    bad("unknown key '" + key + "'", loc);
  }
}

void check_config(const PipelineConfig& c) {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw Error("config", what);
  };
  need(c.domain.ni > 0 && c.domain.nj > 0 && c.domain.nk > 0, "domain sizes must be positive");
  need(c.workers > 0, "workers must be positive");
  need(c.alignment > 0, "alignment must be positive");
  need(!c.tiles.empty(), "tile menu must not be empty");
  for (int t : c.tiles) need(t >= 0, "tile sizes must be non-negative");
  need(c.m > 0, "m must be positive");
  need(c.gain > 0, "gain must be positive");
  need(c.l_max > 0, "l_max must be positive");
  need(c.depth > 0, "depth must be positive");
  need(c.reps > 0, "reps must be positive");
  need(c.noise_margin >= 0 && c.noise_margin < 1, "noise_margin must be in [0, 1)");
  need(c.bandwidth >= 0, "bandwidth must be non-negative");
  need(!c.tuning_module.empty(), "tuning_module must be set");
}

PipelineConfig parse_config(std::string_view text) {
  PipelineConfig c;
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.resize(i);
        break;
      }
    }
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    const SourceLoc loc{number, int(line.find_first_not_of(" \t")) + 1};
    if (eq == std::string::npos) bad("expected 'key = value'", loc);
    apply_setting(c, trim(std::string_view(t).substr(0, eq)), t.substr(eq + 1), loc);
  }
  check_config(c);
  return c;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io error", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void apply_override(PipelineConfig& c, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw Error("config", "override '" + assignment + "' is not key=value");
  apply_setting(c, trim(std::string_view(assignment).substr(0, eq)), assignment.substr(eq + 1));
  check_config(c);
}

nlohmann::json config_to_json(const PipelineConfig& c) {
  std::vector<std::string> owned;
  if (c.domain.west) owned.push_back("west");
  if (c.domain.east) owned.push_back("east");
  if (c.domain.south) owned.push_back("south");
  if (c.domain.north) owned.push_back("north");
  return {{"version", PipelineConfig::kVersion},
          {"domain", {c.domain.ni, c.domain.nj, c.domain.nk}},
          {"owned", owned},
          {"workers", c.workers},
          {"alignment", c.alignment},
          {"tiles", c.tiles},
          {"m", c.m},
          {"gain", c.gain},
          {"l_max", c.l_max},
          {"depth", c.depth},
          {"reps", c.reps},
          {"seed", c.seed},
          {"noise_margin", c.noise_margin},
          {"model_cost", c.model_cost},
          {"bandwidth", c.bandwidth},
          {"tuning_module", c.tuning_module}};
}

std::string config_text(const PipelineConfig& c) {
  std::ostringstream os;
  auto list = [](const auto& xs, bool quote) {
    std::string s = "[";
    for (std::size_t i = 0; i < xs.size(); ++i) {
      s += i ? ", " : "";
      if constexpr (std::is_same_v<std::decay_t<decltype(xs[i])>, std::string>)
        s += quote ? "\"" + xs[i] + "\"" : xs[i];
      else
        s += std::to_string(xs[i]);
    }
    return s + "]";
  };
  std::vector<std::string> owned;
  if (c.domain.west) owned.push_back("west");
  if (c.domain.east) owned.push_back("east");
  if (c.domain.south) owned.push_back("south");
  if (c.domain.north) owned.push_back("north");
  os << "version = " << PipelineConfig::kVersion << "\n"
     << "domain = " << list(std::vector<int>{c.domain.ni, c.domain.nj, c.domain.nk}, false) << "\n"
     << "owned = " << list(owned, true) << "\n"
     << "workers = " << c.workers << "\n"
     << "alignment = " << c.alignment << "\n"
     << "tiles = " << list(c.tiles, false) << "\n"
     << "m = " << c.m << "\n"
     << "gain = " << num_text(c.gain) << "\n"
     << "l_max = " << c.l_max << "\n"
     << "depth = " << c.depth << "\n"
     << "reps = " << c.reps << "\n"
     << "seed = " << c.seed << "\n"
     << "noise_margin = " << num_text(c.noise_margin) << "\n"
     << "model_cost = " << (c.model_cost ? "true" : "false") << "\n"
     << "bandwidth = " << num_text(c.bandwidth) << "\n"
     << "tuning_module = \"" << c.tuning_module << "\"\n";
  return os.str();
}

TunerOptions tuner_options(const PipelineConfig& c, double bandwidth) {
  TunerOptions o;
  o.depth = c.depth;
  o.l_max = c.l_max;
  o.m = c.m;
  o.gain = c.gain;
  o.noise_margin = c.noise_margin;
  o.reps = c.reps;
  o.workers = c.workers;
  o.seed = c.seed;
  o.model_cost = c.model_cost;
  o.bandwidth = bandwidth;
  return o;
}

}  // namespace sf
