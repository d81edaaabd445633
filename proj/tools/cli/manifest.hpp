#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

namespace fsre::cli {

namespace fs = std::filesystem;

std::string sha256_file(const fs::path& path);

// Per-command record merged into <output_dir>/manifest.json under
// "commands".<name>. Holds no timestamps, so reruns with mock backends
// reproduce the file byte for byte.
class Manifest {
 public:
  Manifest(std::string command, const nlohmann::json& config_snapshot);

  void add_input(const std::string& key, const fs::path& path);
  void add_output(const fs::path& relative);
  nlohmann::json& details() { return entry_["details"]; }
  void warn(const std::string& message);

  void write(const fs::path& output_dir) const;

 private:
  std::string command_;
  nlohmann::json entry_;
};

}  // namespace fsre::cli
