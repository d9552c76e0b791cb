/*
 * Copyright 2026 The fedsten Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef FEDSTEN_COMMON_ERROR_H_
#define FEDSTEN_COMMON_ERROR_H_

#include <stdexcept>
#include <string>

namespace fedsten {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition violated by the caller (bad config, out-of-range argument).
class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

// Two parameter sets (or a set and a model) disagree on names, roles or dims.
class SchemaMismatchError : public Error {
 public:
  using Error::Error;
};

// A byte sequence could not be decoded.
class DecodeError : public Error {
 public:
  using Error::Error;
};

// The peer went away or the socket failed.
class TransportError : public Error {
 public:
  using Error::Error;
};

// A well-formed message arrived at the wrong time or with the wrong content.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// A federation run was aborted. The message names the round and client.
class FederationError : public Error {
 public:
  using Error::Error;
};

}  // namespace fedsten

#endif  // FEDSTEN_COMMON_ERROR_H_
