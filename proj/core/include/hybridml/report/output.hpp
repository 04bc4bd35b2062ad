#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

namespace hybridml::report {

/// Lower-case hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

/// Writes files under one root directory and remembers what it wrote. Relative names only;
/// names that are absolute or climb out of the root are rejected.
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path root);

  const std::filesystem::path& root() const noexcept { return root_; }

  /// Writes `bytes` to root/name (creating parent directories) and records its hash.
  void write(const std::string& name, const std::string& bytes);

  /// Files written so far, relative name -> SHA-256.
  const std::map<std::string, std::string>& written() const noexcept { return hashes_; }

  /// Records files already under the root (from earlier stages) as if written now. The MANIFEST is skipped.
  void adopt_existing();

  /// MANIFEST: format/version header, status (complete or partial), then one "<sha256>  <size>  <name>"
  /// line per file in name order. The MANIFEST itself is not listed.
  void write_manifest(bool complete, const std::string& note = {});

 private:
  std::filesystem::path resolve(const std::string& name) const;

  std::filesystem::path root_;
  std::map<std::string, std::string> hashes_;
  std::map<std::string, std::uintmax_t> sizes_;
};

}  // namespace hybridml::report
