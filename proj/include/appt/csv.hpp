#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace appt::csv {

// Splits one CSV record. Handles double-quoted fields with "" escapes and
// trims unquoted whitespace. Does not support embedded newlines.
std::vector<std::string> split_record(std::string_view line);

// Reads the next non-blank line, stripping a trailing '\r'. With strip_bom
// set, a leading UTF-8 byte-order mark is dropped too (pass it for the
// header line). Returns false at EOF.
bool read_line(std::istream& in, std::string& line, bool strip_bom = false);

// Quotes a field only when it contains a delimiter, quote or newline.
std::string escape(std::string_view field);

}  // namespace appt::csv
