// xreid/error.hpp

// Copyright 2026 the xreid developers

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef XREID_ERROR_HPP_
#define XREID_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace xreid {

// Error categories mirror the C API status codes.
enum class ErrorCode {
  kArgument,  // precondition violated by the caller
  kParse,     // malformed input file
  kIo,        // filesystem failure
  kState,     // valid inputs but the request is impossible (no triplet, no pairs)
  kNumeric,   // non-finite values where finite ones are required
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg)
      : std::runtime_error(msg), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Raise(ErrorCode code, const std::string& msg) {
  throw Error(code, msg);
}

inline void Require(bool cond, ErrorCode code, const std::string& msg) {
  if (!cond) Raise(code, msg);
}

}  // namespace xreid

#endif  // XREID_ERROR_HPP_
