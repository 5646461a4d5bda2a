#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace unifilter::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& file);

/// One per output directory: what ran, with which inputs.
class RunManifest {
 public:
  RunManifest(std::string command, std::uint64_t seed);

  nlohmann::json& config() { return config_; }
  void add_input(const std::filesystem::path& file);
  void add_output(const std::string& name) { outputs_.push_back(name); }
  /// Writes manifest.json into `dir`, stamping the finish time.
  void write(const std::filesystem::path& dir) const;

 private:
  std::string command_;
  std::uint64_t seed_;
  nlohmann::json config_ = nlohmann::json::object();
  nlohmann::json inputs_ = nlohmann::json::array();
  std::vector<std::string> outputs_;
  std::chrono::system_clock::time_point started_;
};

}  // namespace unifilter::cli
