/*
 * Copyright (C) 2026 The eesim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
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

namespace eesim {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition violated by caller-supplied values (non-finite input, bad ratio, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// Operand shapes or lengths do not agree.
class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

// Remaining time budget is already exhausted when a frequency is requested.
class DeadlineMissed : public Error {
 public:
  using Error::Error;
};

// Configuration or file content is malformed or inconsistent.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Filesystem read/write failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace eesim
