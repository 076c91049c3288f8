/*
 * Copyright 2026 The qharma Authors
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

#ifndef QHARMA_ERROR_HPP_
#define QHARMA_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace qharma {

enum class ErrorCode {
  kInvalidArgument = 1,
  kIo,
  kFormat,
  kNumerical,
  kDimensionMismatch,
};

const char* ErrorCodeName(ErrorCode code);

// All library failures surface as this exception; the C API maps the code
// onto its status enum.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void Fail(ErrorCode code, const std::string& message);

inline void Require(bool condition, const std::string& message) {
  if (!condition) Fail(ErrorCode::kInvalidArgument, message);
}

}  // namespace qharma

#endif  // QHARMA_ERROR_HPP_
