// Copyright 2026 The hstrat Authors.
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

namespace hstrat {

// Input that violates a data contract. The CLI maps these to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Filesystem failures. The CLI maps these to exit code 3.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define HSTRAT_DEFINE_ERROR(Name)                  \
  class Name : public ValidationError {            \
   public:                                         \
    using ValidationError::ValidationError;        \
  }

HSTRAT_DEFINE_ERROR(AlignmentError);
HSTRAT_DEFINE_ERROR(RangeError);
HSTRAT_DEFINE_ERROR(SimplexError);
HSTRAT_DEFINE_ERROR(MagicError);
HSTRAT_DEFINE_ERROR(TruncationError);
HSTRAT_DEFINE_ERROR(EncodingError);
HSTRAT_DEFINE_ERROR(HeaderError);
HSTRAT_DEFINE_ERROR(DimensionError);
HSTRAT_DEFINE_ERROR(DegenerateError);
HSTRAT_DEFINE_ERROR(InsufficientDataError);
HSTRAT_DEFINE_ERROR(EmptyDivisionError);
HSTRAT_DEFINE_ERROR(UnknownAttributeError);
HSTRAT_DEFINE_ERROR(SpecError);

#undef HSTRAT_DEFINE_ERROR

// CSV parse failure with a 1-based row (header is row 1) and 0-based column.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, std::size_t row, std::size_t column)
      : ValidationError(what + " (row " + std::to_string(row) + ", column " +
                        std::to_string(column) + ")"),
        row_(row),
        column_(column) {}

  std::size_t row() const { return row_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

}  // namespace hstrat
