#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace anatprior::cli {

// One recognised "section.key" with its default and a short description.
struct ConfigKey {
  std::string key;
  std::string default_value;
  std::string help;
};

const std::vector<ConfigKey>& config_keys();

// key = value settings with section headers. Defaults, then a file, then
// flags; any key outside config_keys() is rejected with ConfigError.
class Config {
 public:
  Config();

  void load_file(const std::filesystem::path& path);
  void load_string(const std::string& text, const std::string& origin = "<string>");
  void set(const std::string& key, const std::string& value);
  // "section.key=value".
  void set_assignment(const std::string& assignment);

  const std::string& get(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::size_t get_size(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<double> get_list(const std::string& key) const;

  // Every key, grouped by section in registry order.
  std::string to_ini() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace anatprior::cli
