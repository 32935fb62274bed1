/*
 * Copyright 2026 The bcx Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>
#include <vector>

#include <openssl/evp.h>

#include <json.hpp>

#include "bcx/error.hpp"

namespace bcx {

inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    fail(ErrorKind::kIo, "SHA-256 digest failed");
  }
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < length; ++i) {
    std::snprintf(buf, sizeof(buf), "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct ManifestEntry {
  std::string path;  // relative to the bundle directory
  std::string stage;
  std::string sha256;
  std::size_t bytes = 0;
};

struct StageStatus {
  std::string name;
  bool ok = false;
  std::string message;
};

/// Output directory plus a manifest of every file written into it.
class ReportBundle {
 public:
  explicit ReportBundle(std::filesystem::path dir) : dir_(std::move(dir)) {}

  const std::filesystem::path& dir() const { return dir_; }
  const std::vector<ManifestEntry>& entries() const { return entries_; }
  const std::vector<StageStatus>& stages() const { return stages_; }

  void write(const std::string& relative, std::string_view content, const std::string& stage) {
    std::filesystem::create_directories(dir_);
    const auto path = dir_ / relative;
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::kIo, "cannot write '" + path.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) fail(ErrorKind::kIo, "short write to '" + path.string() + "'");
    entries_.push_back({relative, stage, sha256_hex(content), content.size()});
  }

  void record_stage(std::string name, bool ok, std::string message = {}) {
    stages_.push_back({std::move(name), ok, std::move(message)});
  }

  bool all_ok() const {
    for (const auto& s : stages_) {
      if (!s.ok) return false;
    }
    return true;
  }

  nlohmann::ordered_json manifest(const nlohmann::ordered_json& config) const {
    nlohmann::ordered_json files = nlohmann::ordered_json::array();
    for (const auto& e : entries_) {
      files.push_back({{"path", e.path}, {"stage", e.stage}, {"sha256", e.sha256}, {"bytes", e.bytes}});
    }
    nlohmann::ordered_json stages = nlohmann::ordered_json::array();
    for (const auto& s : stages_) {
      stages.push_back({{"name", s.name}, {"ok", s.ok}, {"message", s.message}});
    }
    return {{"format", "bcx-manifest"},
            {"version", 1},
            {"config", config},
            {"stages", stages},
            {"files", files}};
  }

  void write_manifest(const nlohmann::ordered_json& config) {
    std::filesystem::create_directories(dir_);
    std::ofstream out(dir_ / "manifest.json", std::ios::binary);
    if (!out) fail(ErrorKind::kIo, "cannot write manifest in '" + dir_.string() + "'");
    out << manifest(config).dump(2) << '\n';
  }

  /// True when every entry exists on disk with the recorded hash.
  bool verify() const {
    for (const auto& e : entries_) {
      const auto path = dir_ / e.path;
      if (!std::filesystem::exists(path) || sha256_hex(read_file(path)) != e.sha256) return false;
    }
    return true;
  }

 private:
  std::filesystem::path dir_;
  std::vector<ManifestEntry> entries_;
  std::vector<StageStatus> stages_;
};

}  // namespace bcx
