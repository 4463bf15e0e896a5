#pragma once

// Line based `key = value` settings: defaults, then a config file, then
// command line flags. The resolved map is written back next to every output.

#include <map>
#include <string>
#include <vector>

namespace wasep::cli {

class Settings {
 public:
  Settings() = default;
  explicit Settings(std::map<std::string, std::string> defaults) : kv_(std::move(defaults)) {}

  // Values for keys not in the defaults are rejected.
  void merge_file(const std::string& path);
  void set(const std::string& key, const std::string& value);

  std::string str(const std::string& key) const;
  double num(const std::string& key) const;
  long integer(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<std::string> list(const std::string& key) const;  // comma separated

  const std::map<std::string, std::string>& values() const { return kv_; }
  std::string render(const std::string& command, const std::string& version) const;
  static std::map<std::string, std::string> parse(const std::string& text);

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace wasep::cli
