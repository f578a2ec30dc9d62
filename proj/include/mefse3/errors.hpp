// Copyright 2026 The mefse3 Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace mefse3 {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input violates a structural invariant (dimension, skew block, rotation).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Logarithm requested too close to a rotation by pi.
class BranchError : public Error {
 public:
  using Error::Error;
};

// Point lies (numerically) on the principal plane of the camera.
class DegenerateDepth : public Error {
 public:
  using Error::Error;
};

class FixedPointDiverged : public Error {
 public:
  using Error::Error;
};

class RiccatiSolveFailed : public Error {
 public:
  using Error::Error;
};

class SingularInnovation : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// A filter run stopped; carries the frame at which the step failed.
class FilterFailure : public Error {
 public:
  FilterFailure(const std::string& what, int frame)
      : Error("frame " + std::to_string(frame) + ": " + what), frame_(frame) {}
  int frame() const { return frame_; }

 private:
  int frame_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace mefse3
