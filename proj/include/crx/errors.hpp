// Copyright 2026 The CRX Authors
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

#ifndef CRX_ERRORS_HPP_
#define CRX_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace crx {

// Base for input that cannot be turned into a Dataset.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& source, std::size_t line,
             const std::string& what)
      : DataError(source + ":" + std::to_string(line) + ": " + what),
        source_(source),
        line_(line) {}

  const std::string& source() const { return source_; }
  std::size_t line() const { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

class MalformedFile : public ParseError {
 public:
  using ParseError::ParseError;
};

class MalformedRecord : public ParseError {
 public:
  using ParseError::ParseError;
};

class MissingColumn : public DataError {
 public:
  explicit MissingColumn(const std::string& column)
      : DataError("missing column: " + column), column_(column) {}
  const std::string& column() const { return column_; }

 private:
  std::string column_;
};

}  // namespace crx

#endif  // CRX_ERRORS_HPP_
