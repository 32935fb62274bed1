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

#include <stdexcept>
#include <string>
#include <string_view>

namespace bcx {

/// Category of a failure raised anywhere in the toolkit.
enum class ErrorKind {
  kParse,
  kSchema,
  kValue,
  kDegenerateData,
  kShape,
  kStratification,
  kSelection,
  kEmptyNode,
  kDegenerateLabel,
  kConfig,
  kBatchNorm,
  kTraining,
  kUndefinedMetric,
  kDegenerateFeature,
  kDegenerateTarget,
  kUseSampledEstimator,
  kDegeneracy,
  kIo,
  kUsage,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParse: return "parse error";
    case ErrorKind::kSchema: return "schema error";
    case ErrorKind::kValue: return "value error";
    case ErrorKind::kDegenerateData: return "degenerate-data error";
    case ErrorKind::kShape: return "shape error";
    case ErrorKind::kStratification: return "stratification error";
    case ErrorKind::kSelection: return "selection error";
    case ErrorKind::kEmptyNode: return "empty-node error";
    case ErrorKind::kDegenerateLabel: return "degenerate-label error";
    case ErrorKind::kConfig: return "config error";
    case ErrorKind::kBatchNorm: return "batch-norm error";
    case ErrorKind::kTraining: return "training error";
    case ErrorKind::kUndefinedMetric: return "undefined-metric error";
    case ErrorKind::kDegenerateFeature: return "degenerate-feature error";
    case ErrorKind::kDegenerateTarget: return "degenerate-target error";
    case ErrorKind::kUseSampledEstimator: return "use-sampled-estimator error";
    case ErrorKind::kDegeneracy: return "degeneracy error";
    case ErrorKind::kIo: return "file error";
    case ErrorKind::kUsage: return "usage error";
  }
  return "error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace bcx
