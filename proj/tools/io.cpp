#include "io.hpp"

#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>
#include <stdexcept>

#include <openssl/evp.h>

namespace modrev::cli {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

std::string sha256_hex(const std::string& content) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), content.data(), content.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) {
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return os.str();
}

Manifest::Manifest(std::string command, std::string config)
    : command_(std::move(command)), config_(std::move(config)) {}

void Manifest::input(const std::filesystem::path& path, const std::string& content) {
  inputs_.push_back({{"path", path.string()}, {"sha256", sha256_hex(content)}});
}

void Manifest::output(const std::filesystem::path& path) { outputs_.push_back(path.string()); }

void Manifest::seed(const std::string& name, std::uint64_t value) { seeds_[name] = value; }

void Manifest::timing(const std::string& name, double ms) { timing_[name] = ms; }

nlohmann::json Manifest::to_json(bool timing) const {
  nlohmann::json doc{{"tool", "modrev"},
                     {"version", kToolVersion},
                     {"command", command_},
                     {"config", config_},
                     {"seeds", seeds_},
                     {"inputs", inputs_},
                     {"outputs", outputs_}};
  if (timing) doc["timing_ms"] = timing_;
  for (const auto& [k, v] : extra_.items()) doc[k] = v;
  return doc;
}

}  // namespace modrev::cli
