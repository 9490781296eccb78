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

#include <gtest/gtest.h>

#include <filesystem>
#include <string>

#include "eng/common.hpp"

namespace eng {
namespace {

std::filesystem::path fresh_dir(const std::string& name) {
  const std::filesystem::path dir = std::filesystem::path(ENG_TEST_TMP) / name;
  std::filesystem::remove_all(dir);
  return dir;
}

ad::ParameterStore sample_store() {
  ad::ParameterStore store;
  Rng rng(8);
  store.create("encoder/proj_w", ad::glorot(3, 2, rng));
  store.create("head/b", ad::Tensor::row_vector({0.1, -1e-8, 12345.678}));
  store.set_step(17);
  return store;
}

TEST(Checkpoint, RoundTripAtF32) {
  const auto dir = fresh_dir("ckpt_round");
  ad::ParameterStore store = sample_store();
  save_checkpoint(dir, store, {{"task", "maslow"}, {"dim", 2}});
  EXPECT_TRUE(std::filesystem::exists(dir / "encoder.proj_w.f32"));
  EXPECT_EQ(std::filesystem::file_size(dir / "head.b.f32"), 12u);
  const Checkpoint back = load_checkpoint(dir);
  store.round_to_f32();
  EXPECT_EQ(back.store.names(), store.names());
  for (const std::string& n : store.names()) EXPECT_EQ(back.store.value(n), store.value(n));
  EXPECT_EQ(back.store.step(), 17);
  EXPECT_EQ(back.meta.at("task"), "maslow");
  EXPECT_EQ(back.meta.at("dim"), 2);

  const auto again = fresh_dir("ckpt_again");
  save_checkpoint(again, back.store, back.meta);
  EXPECT_EQ(read_file(again / "encoder.proj_w.f32"), read_file(dir / "encoder.proj_w.f32"));
  EXPECT_EQ(read_file(again / "manifest.json"), read_file(dir / "manifest.json"));
}

TEST(Checkpoint, ExpectedNames) {
  const auto dir = fresh_dir("ckpt_names");
  save_checkpoint(dir, sample_store(), nlohmann::json::object());
  EXPECT_NO_THROW(load_checkpoint(dir, {"encoder/proj_w", "head/b"}));
  EXPECT_THROW(load_checkpoint(dir, {"encoder/proj_w"}), DataError);
  EXPECT_THROW(load_checkpoint(dir, {"encoder/proj_w", "head/b", "head/w"}), DataError);
}

TEST(Checkpoint, CorruptDirectories) {
  EXPECT_THROW(load_checkpoint(fresh_dir("ckpt_missing")), DataError);

  const auto dir = fresh_dir("ckpt_truncated");
  save_checkpoint(dir, sample_store(), nlohmann::json::object());
  write_file(dir / "head.b.f32", std::string(8, '\0'));
  EXPECT_THROW(load_checkpoint(dir), DataError);
  std::filesystem::remove(dir / "head.b.f32");
  EXPECT_THROW(load_checkpoint(dir), DataError);

  write_file(dir / "manifest.json", "{not json");
  EXPECT_THROW(load_checkpoint(dir), DataError);
  write_file(dir / "manifest.json", R"({"format":"other","dtype":"f32","parameters":[]})");
  EXPECT_THROW(load_checkpoint(dir), DataError);
}

}  // namespace
}  // namespace eng
