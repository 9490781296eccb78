// Copyright 2026 The ENG Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "eng/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>

namespace eng {
namespace {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes a little-endian host");

std::string encode_f32(const ad::Tensor& t) {
  std::string bytes(t.size() * sizeof(float), '\0');
  for (std::size_t i = 0; i < t.size(); ++i) {
    const float f = static_cast<float>(t[i]);
    std::memcpy(bytes.data() + i * sizeof(float), &f, sizeof(float));
  }
  return bytes;
}

}  // namespace

std::string parameter_file_name(const std::string& name) {
  std::string out;
  for (char c : name) out.push_back(c == '/' ? '.' : c);
  return out + ".f32";
}

void save_checkpoint(const std::filesystem::path& dir, const ad::ParameterStore& store, const json& meta) {
  std::filesystem::create_directories(dir);
  json params = json::array();
  for (const std::string& name : store.names()) {
    const ad::Tensor& v = store.value(name);
    const std::string file = parameter_file_name(name);
    write_file(dir / file, encode_f32(v));
    params.push_back({{"name", name}, {"shape", {v.rows(), v.cols()}}, {"file", file}});
  }
  json manifest = {{"format", kCheckpointFormat},
                   {"dtype", "f32"},
                   {"optimizer_step", store.step()},
                   {"parameters", params},
                   {"meta", meta}};
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path& dir, const std::set<std::string>& expected) {
  const std::filesystem::path manifest_path = dir / "manifest.json";
  if (!std::filesystem::exists(manifest_path)) {
    throw DataError("checkpoint " + dir.string() + ": manifest.json not found");
  }
  json manifest;
  try {
    manifest = json::parse(read_file(manifest_path));
  } catch (const json::exception& e) {
    throw DataError(manifest_path.string() + ": " + e.what());
  }
  if (manifest.value("format", "") != kCheckpointFormat || manifest.value("dtype", "") != "f32") {
    throw DataError(manifest_path.string() + ": unsupported checkpoint format");
  }
  Checkpoint ckpt;
  std::set<std::string> seen;
  for (const json& p : manifest.at("parameters")) {
    const std::string name = p.at("name").get<std::string>();
    if (!expected.empty() && !expected.count(name)) {
      throw DataError("checkpoint " + dir.string() + ": unknown parameter '" + name + "'");
    }
    const auto shape = p.at("shape").get<std::vector<std::size_t>>();
    if (shape.size() != 2) throw DataError("checkpoint parameter '" + name + "': shape must have rank 2");
    const std::filesystem::path file = dir / p.at("file").get<std::string>();
    if (!std::filesystem::exists(file)) throw DataError("checkpoint parameter '" + name + "': array file missing");
    const std::string bytes = read_file(file);
    const std::size_t count = shape[0] * shape[1];
    if (bytes.size() != count * sizeof(float)) {
      throw DataError("checkpoint parameter '" + name + "': expected " + std::to_string(count * sizeof(float)) +
                      " bytes, found " + std::to_string(bytes.size()));
    }
    ad::Tensor t(shape[0], shape[1]);
    for (std::size_t i = 0; i < count; ++i) {
      float f = 0.0f;
      std::memcpy(&f, bytes.data() + i * sizeof(float), sizeof(float));
      t[i] = static_cast<double>(f);
    }
    ckpt.store.create(name, std::move(t));
    seen.insert(name);
  }
  for (const std::string& name : expected) {
    if (!seen.count(name)) throw DataError("checkpoint " + dir.string() + ": parameter '" + name + "' missing");
  }
  ckpt.store.set_step(manifest.value("optimizer_step", std::int64_t{0}));
  ckpt.meta = manifest.value("meta", json::object());
  return ckpt;
}

}  // namespace eng
