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

#include <gtest/gtest.h>

#include <filesystem>

#include "bcx/dataset.hpp"
#include "bcx/persistence.hpp"

namespace bcx {
namespace {

class PersistenceTest : public ::testing::TestWithParam<ModelKind> {};

TEST_P(PersistenceTest, RoundTripIsBitwise) {
  const auto ds = load_wdbc(BCX_WDBC_PATH);
  auto spec = ModelSpec::defaults(GetParam());
  spec.forest.n_trees = 7;
  spec.mlp.epochs = 3;
  const auto model = train_model(spec, ds, 12);
  const auto text = model_to_json(model).dump();
  const auto back = model_from_json(nlohmann::json::parse(text));
  EXPECT_EQ(back.spec.kind, model.spec.kind);
  EXPECT_EQ(back.seed, model.seed);
  EXPECT_EQ(back.predict_proba(ds.features), model.predict_proba(ds.features));
  EXPECT_EQ(back.predict_labels(ds.features), model.predict_labels(ds.features));
  EXPECT_EQ(model_to_json(back).dump(), text);

  const auto path = std::filesystem::temp_directory_path() /
                    ("bcx_model_" + std::string(to_string(GetParam())) + ".json");
  save_model(model, path.string());
  EXPECT_EQ(load_model(path.string()).predict_proba(ds.features), model.predict_proba(ds.features));
  std::filesystem::remove(path);
}

INSTANTIATE_TEST_SUITE_P(AllKinds, PersistenceTest,
                         ::testing::Values(ModelKind::kTree, ModelKind::kForest, ModelKind::kMlp,
                                           ModelKind::kEnsemble),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(PersistenceErrors, VersionAndShape) {
  const auto ds = load_wdbc(BCX_WDBC_PATH);
  const auto model = train_model(ModelSpec::defaults(ModelKind::kTree), ds, 1);
  auto doc = model_to_json(model);
  doc["version"] = 99;
  try {
    model_from_json(doc);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSchema);
  }
  doc = model_to_json(model);
  doc.erase("model");
  EXPECT_THROW(model_from_json(doc), Error);
  EXPECT_THROW(load_model("/nonexistent/model.json"), Error);
}

}  // namespace
}  // namespace bcx
