#pragma once

#include <cstdio>
#include <string>
#include <vector>

namespace cohwalk::csv {

/// 12 significant digits, '.' decimal point, no locale surprises.
inline std::string format(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", value);
    return buf;
}

inline std::string format(int value) { return std::to_string(value); }

/// Minimal CSV builder: header once, then rows; comma delimiter, UTF-8,
/// one trailing newline per row.
class Table {
public:
    explicit Table(std::vector<std::string> header) {
        append_row(header);
    }

    void add_row(std::vector<std::string> cells) { append_row(cells); }

    const std::string& content() const { return body_; }

private:
    void append_row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) body_ += ',';
            body_ += cells[i];
        }
        body_ += '\n';
    }

    std::string body_;
};

} // namespace cohwalk::csv
