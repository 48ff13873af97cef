#include "hdi/csv.hpp"

#include <iterator>

#include "hdi/error.hpp"
#include "hdi/numfmt.hpp"

namespace hdi::csv {

Reader::Reader(std::istream& in, char delimiter)
    : buffer_(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()),
      delimiter_(delimiter) {
    if (buffer_.starts_with("\xEF\xBB\xBF")) pos_ = 3;
}

bool Reader::next(Row& row) {
    row.fields.clear();
    row.line = line_;
    if (pos_ >= buffer_.size()) return false;

    Field field;
    bool at_field_start = true;
    while (true) {
        if (pos_ >= buffer_.size()) {
            row.fields.push_back(std::move(field));
            return true;
        }
        const char c = buffer_[pos_];
        if (at_field_start && c == '"') {
            field.quoted = true;
            const std::size_t open_line = line_;
            ++pos_;
            while (true) {
                if (pos_ >= buffer_.size()) {
                    throw ParseError("UnterminatedQuote",
                                     "unterminated quoted field starting on line " +
                                         std::to_string(open_line),
                                     open_line, row.fields.size() + 1);
                }
                const char q = buffer_[pos_++];
                if (q == '"') {
                    if (pos_ < buffer_.size() && buffer_[pos_] == '"') {
                        field.text.push_back('"');
                        ++pos_;
                    } else {
                        break;
                    }
                } else {
                    if (q == '\n') ++line_;
                    field.text.push_back(q);
                }
            }
            at_field_start = false;
            // Only a delimiter or end of line may follow a closing quote.
            if (pos_ < buffer_.size()) {
                const char after = buffer_[pos_];
                const bool crlf = after == '\r' && pos_ + 1 < buffer_.size() && buffer_[pos_ + 1] == '\n';
                if (after != delimiter_ && after != '\n' && !crlf) {
                    throw ParseError("MalformedQuote",
                                     "unexpected character after closing quote on line " +
                                         std::to_string(line_),
                                     line_, row.fields.size() + 1);
                }
            }
            continue;
        }
        if (c == delimiter_) {
            row.fields.push_back(std::move(field));
            field = Field{};
            at_field_start = true;
            ++pos_;
            continue;
        }
        if (c == '\n' || (c == '\r' && pos_ + 1 < buffer_.size() && buffer_[pos_ + 1] == '\n')) {
            pos_ += (c == '\r') ? 2 : 1;
            ++line_;
            row.fields.push_back(std::move(field));
            return true;
        }
        field.text.push_back(c);
        at_field_start = false;
        ++pos_;
    }
}

std::string escape(std::string_view text, char delimiter) {
    const bool needs_quotes = text.find(delimiter) != std::string_view::npos ||
                              text.find_first_of("\"\r\n") != std::string_view::npos;
    if (!needs_quotes) return std::string(text);
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string join(const std::vector<std::string>& cells, char delimiter) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out.push_back(delimiter);
        out += escape(cells[i], delimiter);
    }
    return out;
}

bool is_blank(const Row& row) {
    for (const auto& f : row.fields) {
        if (!trim(f.text).empty()) return false;
    }
    return true;
}

}  // namespace hdi::csv
