#include "chlab/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace chlab {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end || !std::isfinite(out)) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

}  // namespace

void RunConfig::validate() const {
  if (!(L > 0.0)) throw ConfigError("grid.L must be positive");
  if (N < 16 || N % 2 != 0) throw ConfigError("grid.N must be even and at least 16");
  if (!(k > 0.0)) throw ConfigError("soliton.k must be positive");
  if (!(c0 > 2.0 * k)) throw ConfigError("soliton.c0 must exceed 2k");
  try {
    (void)measure();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("noise.atoms: ") + e.what());
  }
  const auto colon = sigma.find(':');
  if (colon == std::string::npos || (sigma.substr(0, colon) != "constant" && sigma.substr(0, colon) != "sine")) {
    throw ConfigError("noise.sigma must be 'constant:v' or 'sine:mean,amp'");
  }
  solver.validate();
  if (epsilons.empty()) throw ConfigError("experiment.epsilons must not be empty");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] > 0.0)) throw ConfigError("experiment.epsilons must be positive");
    if (i > 0 && !(epsilons[i] < epsilons[i - 1])) throw ConfigError("experiment.epsilons must be decreasing");
  }
  if (!(alpha > 0.0)) throw ConfigError("experiment.alpha must be positive");
  if (!(T > 0.0)) throw ConfigError("experiment.T must be positive");
  if (n_paths < 1) throw ConfigError("experiment.n_paths must be at least 1");
}

std::string print_config(const RunConfig& c) {
  std::ostringstream out;
  out << "grid.L = " << num(c.L) << '\n';
  out << "grid.N = " << c.N << '\n';
  out << "soliton.c0 = " << num(c.c0) << '\n';
  out << "soliton.k = " << num(c.k) << '\n';
  out << "noise.atoms = ";
  for (std::size_t i = 0; i < c.atoms.size(); ++i) {
    out << (i ? ", " : "") << num(c.atoms[i].z) << ':' << num(c.atoms[i].w);
  }
  out << '\n';
  out << "noise.sigma = " << c.sigma << '\n';
  out << "solver.dt = " << num(c.solver.dt) << '\n';
  out << "solver.record_every = " << c.solver.record_every << '\n';
  out << "solver.dealias = " << (c.solver.dealias ? "true" : "false") << '\n';
  out << "solver.cfl_guard = " << num(c.solver.cfl_guard) << '\n';
  out << "experiment.epsilons = ";
  for (std::size_t i = 0; i < c.epsilons.size(); ++i) out << (i ? ", " : "") << num(c.epsilons[i]);
  out << '\n';
  out << "experiment.alpha = " << num(c.alpha) << '\n';
  out << "experiment.T = " << num(c.T) << '\n';
  out << "experiment.n_paths = " << c.n_paths << '\n';
  out << "experiment.base_seed = " << c.base_seed << '\n';
  out << "output.dir = " << c.out_dir << '\n';
  return out.str();
}

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string v = trim(line.substr(eq + 1));
    if (key == "grid.L") {
      c.L = to_double(key, v);
    } else if (key == "grid.N") {
      c.N = static_cast<int>(to_int(key, v));
    } else if (key == "soliton.c0") {
      c.c0 = to_double(key, v);
    } else if (key == "soliton.k") {
      c.k = to_double(key, v);
    } else if (key == "noise.atoms") {
      c.atoms.clear();
      if (!v.empty()) {
        for (const auto& item : split(v, ',')) {
          const auto colon = item.find(':');
          if (colon == std::string::npos) throw ConfigError(key + ": atoms are written z:w, got '" + item + "'");
          c.atoms.push_back({to_double(key, trim(item.substr(0, colon))), to_double(key, trim(item.substr(colon + 1)))});
        }
      }
    } else if (key == "noise.sigma") {
      c.sigma = v;
    } else if (key == "solver.dt") {
      c.solver.dt = to_double(key, v);
    } else if (key == "solver.record_every") {
      c.solver.record_every = static_cast<int>(to_int(key, v));
    } else if (key == "solver.dealias") {
      c.solver.dealias = to_bool(key, v);
    } else if (key == "solver.cfl_guard") {
      c.solver.cfl_guard = to_double(key, v);
    } else if (key == "experiment.epsilons") {
      c.epsilons.clear();
      for (const auto& item : split(v, ',')) c.epsilons.push_back(to_double(key, item));
    } else if (key == "experiment.alpha") {
      c.alpha = to_double(key, v);
    } else if (key == "experiment.T") {
      c.T = to_double(key, v);
    } else if (key == "experiment.n_paths") {
      c.n_paths = static_cast<int>(to_int(key, v));
    } else if (key == "experiment.base_seed") {
      const long long s = to_int(key, v);
      if (s < 0) throw ConfigError(key + " must be non-negative");
      c.base_seed = static_cast<std::uint64_t>(s);
    } else if (key == "output.dir") {
      c.out_dir = v;
    } else {
      throw ConfigError("unknown key '" + key + "' on line " + std::to_string(lineno));
    }
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read config file " + file);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_hash(const RunConfig& cfg) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : print_config(cfg)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace chlab
