#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace modrev::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// Throws std::runtime_error naming the path when it cannot be read.
std::string read_file(const std::filesystem::path& path);

/// Creates parent directories as needed.
void write_file(const std::filesystem::path& path, const std::string& content);

/// Lowercase hex SHA-256 of the content.
std::string sha256_hex(const std::string& content);

/// Accumulates the run manifest written next to a command's outputs.
class Manifest {
 public:
  Manifest(std::string command, std::string config);

  void input(const std::filesystem::path& path, const std::string& content);
  void output(const std::filesystem::path& path);
  void seed(const std::string& name, std::uint64_t value);
  void timing(const std::string& name, double ms);
  nlohmann::json& extra() { return extra_; }

  /// Timing totals are left out when `timing` is false.
  nlohmann::json to_json(bool timing) const;

 private:
  std::string command_;
  std::string config_;
  nlohmann::json inputs_ = nlohmann::json::array();
  nlohmann::json outputs_ = nlohmann::json::array();
  nlohmann::json seeds_ = nlohmann::json::object();
  nlohmann::json timing_ = nlohmann::json::object();
  nlohmann::json extra_ = nlohmann::json::object();
};

}  // namespace modrev::cli
