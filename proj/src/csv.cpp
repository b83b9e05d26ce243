#include "csv.hpp"

#include "greenwind/common.hpp"

namespace greenwind::detail {

bool CsvReader::next(std::vector<std::string>& fields) {
    fields.clear();
    std::string field;
    bool in_quotes = false;
    bool any = false;
    bool quoted_field = false;
    record_line_ = current_line_;

    int c;
    while ((c = in_.get()) != std::char_traits<char>::eof()) {
        const char ch = static_cast<char>(c);
        if (in_quotes) {
            if (ch == '"') {
                if (in_.peek() == '"') {
                    in_.get();
                    field.push_back('"');
                } else {
                    in_quotes = false;
                }
            } else {
                if (ch == '\n') ++current_line_;
                field.push_back(ch);
            }
            continue;
        }
        if (ch == '"' && field.empty() && !quoted_field) {
            in_quotes = true;
            quoted_field = true;
            any = true;
        } else if (ch == delimiter_) {
            fields.push_back(std::move(field));
            field.clear();
            quoted_field = false;
            any = true;
        } else if (ch == '\r' && in_.peek() == '\n') {
            continue;
        } else if (ch == '\n') {
            ++current_line_;
            if (!any && field.empty()) {
                record_line_ = current_line_;
                continue;
            }
            fields.push_back(std::move(field));
            return true;
        } else {
            field.push_back(ch);
            any = true;
        }
    }
    if (in_quotes) throw RowError(record_line_, "unterminated quoted field");
    if (!any && field.empty()) return false;
    fields.push_back(std::move(field));
    return true;
}

std::string csv_escape(const std::string& field, char delimiter) {
    if (field.find_first_of(std::string{delimiter, '"', '\n', '\r'}) == std::string::npos) return field;
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out.push_back('"');
        out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

}  // namespace greenwind::detail
