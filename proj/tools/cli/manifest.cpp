#include "cli/manifest.hpp"

#include <array>
#include <fstream>
#include <memory>

#include <openssl/evp.h>

#include "fsre/error.hpp"

#ifndef FSRE_VERSION
#define FSRE_VERSION "0.0.0"
#endif

namespace fsre::cli {

using nlohmann::json;

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  std::array<char, 1 << 16> buffer{};
  while (in) {
    in.read(buffer.data(), buffer.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buffer.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  EVP_DigestFinal_ex(ctx.get(), digest.data(), &length);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xf];
  }
  return out;
}

Manifest::Manifest(std::string command, const json& config_snapshot)
    : command_(std::move(command)) {
  entry_["tool_version"] = FSRE_VERSION;
  entry_["config"] = config_snapshot;
  entry_["inputs"] = json::object();
  entry_["outputs"] = json::array();
  entry_["details"] = json::object();
  entry_["warnings"] = json::array();
}

void Manifest::add_input(const std::string& key, const fs::path& path) {
  entry_["inputs"][key] = {{"path", path.string()}, {"sha256", sha256_file(path)}};
}

void Manifest::add_output(const fs::path& relative) { entry_["outputs"].push_back(relative.generic_string()); }

void Manifest::warn(const std::string& message) { entry_["warnings"].push_back(message); }

void Manifest::write(const fs::path& output_dir) const {
  const auto path = output_dir / "manifest.json";
  json doc = json::object();
  if (fs::exists(path)) {
    std::ifstream in(path);
    try {
      doc = json::parse(in);
    } catch (const json::parse_error&) {
      doc = json::object();
    }
  }
  if (!doc.is_object()) doc = json::object();
  doc["commands"][command_] = entry_;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

}  // namespace fsre::cli
