// Copyright 2026 The profilekit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace profilekit {

// Every failure raised by the library carries the name of the module that
// detected it; what() reads "<module>: <message>".
class Error : public std::runtime_error {
 public:
  Error(std::string_view module, const std::string& message)
      : std::runtime_error(std::string(module) + ": " + message), module_(module) {}

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

}  // namespace profilekit
