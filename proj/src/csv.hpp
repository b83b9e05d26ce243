#pragma once

#include <istream>
#include <string>
#include <vector>

namespace greenwind::detail {

/// RFC-4180 record reader: quoted fields, doubled quotes, embedded newlines,
/// LF or CRLF line endings. Blank lines are skipped.
class CsvReader {
public:
    CsvReader(std::istream& in, char delimiter) : in_(in), delimiter_(delimiter) {}

    /// Reads the next record into `fields`; false at end of input.
    bool next(std::vector<std::string>& fields);

    /// 1-based physical line on which the last record started.
    std::size_t line() const { return record_line_; }

private:
    std::istream& in_;
    char delimiter_;
    std::size_t current_line_ = 1;
    std::size_t record_line_ = 0;
};

/// Quotes a field when it contains the delimiter, a quote or a line break.
std::string csv_escape(const std::string& field, char delimiter);

}  // namespace greenwind::detail
