#include "hybridml/report/output.hpp"

#include "hybridml/common.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

namespace hybridml::report {

namespace {
constexpr const char* kModule = "report";
}

std::string sha256_hex(const std::string& bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1) {
    throw Error(kModule, "SHA-256 computation failed");
  }
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < length; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

OutputDir::OutputDir(std::filesystem::path root) : root_(std::move(root)) {
  if (root_.empty()) throw Error(kModule, "output directory is empty");
  std::filesystem::create_directories(root_);
  root_ = std::filesystem::weakly_canonical(root_);
}

std::filesystem::path OutputDir::resolve(const std::string& name) const {
  const std::filesystem::path rel(name);
  if (name.empty() || rel.is_absolute()) throw Error(kModule, "output name '" + name + "' must be relative");
  for (const auto& part : rel) {
    if (part == "..") throw Error(kModule, "output name '" + name + "' leaves the output directory");
  }
  return root_ / rel;
}

void OutputDir::write(const std::string& name, const std::string& bytes) {
  const auto path = resolve(name);
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(kModule, "cannot write " + path.string());
  hashes_[name] = sha256_hex(bytes);
  sizes_[name] = bytes.size();
}

void OutputDir::adopt_existing() {
  for (const auto& entry : std::filesystem::recursive_directory_iterator(root_)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().lexically_relative(root_).generic_string();
    if (name == "MANIFEST" || hashes_.count(name)) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream bytes;
    bytes << in.rdbuf();
    hashes_[name] = sha256_hex(bytes.str());
    sizes_[name] = bytes.str().size();
  }
}

void OutputDir::write_manifest(bool complete, const std::string& note) {
  std::ostringstream m;
  m << "format = hybridml-manifest\nversion = 1\nstatus = " << (complete ? "complete" : "partial") << '\n';
  if (!note.empty()) {
    std::string flat = note;
    for (char& c : flat) {
      if (c == '\n' || c == '\r') c = ' ';
    }
    m << "note = " << flat << '\n';
  }
  m << "files = " << hashes_.size() << '\n';
  for (const auto& [name, hash] : hashes_) m << hash << "  " << sizes_.at(name) << "  " << name << '\n';
  const auto path = resolve("MANIFEST");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << m.str();
  if (!out) throw Error(kModule, "cannot write " + path.string());
}

}  // namespace hybridml::report
