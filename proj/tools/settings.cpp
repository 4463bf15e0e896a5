#include "settings.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "wasep/lattice.hpp"

namespace wasep::cli {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

std::map<std::string, std::string> Settings::parse(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ParameterError("config line " + std::to_string(no) + ": expected key = value");
    out[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return out;
}

void Settings::merge_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParameterError("cannot read config file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  for (const auto& [k, v] : parse(ss.str())) set(k, v);
}

void Settings::set(const std::string& key, const std::string& value) {
  auto it = kv_.find(key);
  if (it == kv_.end()) throw ParameterError("unknown setting '" + key + "'");
  it->second = value;
}

std::string Settings::str(const std::string& key) const { return kv_.at(key); }

double Settings::num(const std::string& key) const {
  const std::string& s = kv_.at(key);
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParameterError("setting '" + key + "' is not a number: " + s);
  }
}

long Settings::integer(const std::string& key) const {
  const std::string& s = kv_.at(key);
  try {
    std::size_t used = 0;
    const long v = std::stol(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParameterError("setting '" + key + "' is not an integer: " + s);
  }
}

bool Settings::flag(const std::string& key) const {
  const std::string& s = kv_.at(key);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ParameterError("setting '" + key + "' is not a boolean: " + s);
}

std::vector<std::string> Settings::list(const std::string& key) const {
  std::vector<std::string> out;
  std::stringstream ss(kv_.at(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string Settings::render(const std::string& command, const std::string& version) const {
  std::ostringstream o;
  o << "# " << command << ", " << version << "\n";
  for (const auto& [k, v] : kv_) o << k << " = " << v << "\n";
  return o.str();
}

}  // namespace wasep::cli
