// Copyright 2026 The chartens Authors. All Rights Reserved.
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

#include <string>
#include <string_view>

#include "chartens/table.hpp"

namespace chartens {

// Content of the first ```tsv fenced block, or the whole trimmed text when no
// fence exists. Throws EmptyOutput when the result holds neither a tab nor a
// newline.
std::string extract_tsv_block(std::string_view text);

// Splits on newlines and tabs and repairs ragged rows to the modal width
// (ties toward the wider width). Blank lines are skipped.
// Throws ParseFailure with fewer than two rows or a modal width below two.
RawTable parse_raw(std::string_view tsv, int source_id);

// Parses one value cell: strips thousands commas, a leading currency sign,
// a trailing percent, and maps "(x)" to -x. Returns nullopt when the text is
// not a finite number.
Value parse_number(std::string_view cell);

// Header row -> column labels, first column -> row labels, the rest -> values.
// Transposes when the value grid has strictly more columns than rows.
NormalizedTable normalize(const RawTable& raw);

// extract_tsv_block + parse_raw + normalize.
NormalizedTable ingest(std::string_view text, int source_id);

}  // namespace chartens
