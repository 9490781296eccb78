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

// Checkpoint directories: manifest.json plus one raw little-endian f32 array
// per parameter, row-major.

#ifndef ENG_CHECKPOINT_HPP_
#define ENG_CHECKPOINT_HPP_

#include <filesystem>
#include <set>
#include <string>

#include "eng/autodiff.hpp"
#include "json.hpp"

namespace eng {

inline constexpr const char* kCheckpointFormat = "eng-checkpoint-1";

struct Checkpoint {
  ad::ParameterStore store;
  nlohmann::json meta;
};

// Values are written at f32; optimizer moments are not persisted.
void save_checkpoint(const std::filesystem::path& dir, const ad::ParameterStore& store,
                     const nlohmann::json& meta);

// When `expected` is non-empty, the manifest must list exactly those names.
Checkpoint load_checkpoint(const std::filesystem::path& dir, const std::set<std::string>& expected = {});

std::string parameter_file_name(const std::string& name);

}  // namespace eng

#endif  // ENG_CHECKPOINT_HPP_
