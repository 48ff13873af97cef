#pragma once

#include <cstddef>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace hdi::csv {

struct Field {
    std::string text;
    bool quoted = false;
};

struct Row {
    std::vector<Field> fields;
    std::size_t line = 0;  ///< 1-based line on which the row starts
};

/// RFC 4180 reader: quoted fields may contain the delimiter, doubled quotes and
/// line breaks. Accepts LF or CRLF endings and skips a leading UTF-8 BOM.
class Reader {
public:
    Reader(std::istream& in, char delimiter = ',');

    /// Reads the next row; returns false at end of input. Throws ParseError on
    /// an unterminated or malformed quoted field.
    bool next(Row& row);

private:
    std::string buffer_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    char delimiter_;
};

/// Quotes `text` if it contains the delimiter, a quote, or a line break.
std::string escape(std::string_view text, char delimiter = ',');

/// Joins already-plain cells with escaping applied.
std::string join(const std::vector<std::string>& cells, char delimiter = ',');

/// True when every field of the row is empty after trimming.
bool is_blank(const Row& row);

}  // namespace hdi::csv
