#ifndef A2T_REPORT_HPP
#define A2T_REPORT_HPP

// Plain-text, markdown and CSV renderings of result tables.

#include <a2t/io.hpp>

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

namespace a2t {

class TextTable {
public:
    explicit TextTable(std::vector<std::string> header) : header_(std::move(header)) {}

    TextTable& add_row(std::vector<std::string> row) {
        row.resize(header_.size());
        rows_.push_back(std::move(row));
        return *this;
    }

    TextTable& add_rule() {
        rules_.push_back(rows_.size());
        return *this;
    }

    const std::vector<std::vector<std::string>>& rows() const { return rows_; }

    // Display width in code points; "±" and other UTF-8 count once.
    static std::size_t width(const std::string& s) {
        std::size_t w = 0;
        for (unsigned char c : s)
            if ((c & 0xC0) != 0x80) ++w;
        return w;
    }

    std::string render_text() const {
        const auto widths = column_widths();
        std::ostringstream out;
        auto line = [&](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (i) out << "  ";
                out << cells[i];
                if (i + 1 < cells.size()) out << std::string(widths[i] - width(cells[i]), ' ');
            }
            out << '\n';
        };
        std::size_t total = 0;
        for (auto w : widths) total += w;
        total += 2 * (widths.empty() ? 0 : widths.size() - 1);
        const std::string rule(total, '-');
        line(header_);
        out << rule << '\n';
        for (std::size_t r = 0; r < rows_.size(); ++r) {
            if (std::find(rules_.begin(), rules_.end(), r) != rules_.end() && r != 0) out << rule << '\n';
            line(rows_[r]);
        }
        return out.str();
    }

    std::string render_markdown() const {
        std::ostringstream out;
        auto line = [&](const std::vector<std::string>& cells) {
            out << '|';
            for (const auto& c : cells) out << ' ' << c << " |";
            out << '\n';
        };
        line(header_);
        out << '|';
        for (std::size_t i = 0; i < header_.size(); ++i) out << (i == 0 ? " --- |" : " ---: |");
        out << '\n';
        for (const auto& r : rows_) line(r);
        return out.str();
    }

    std::string render_csv() const {
        std::ostringstream out;
        CsvWriter w(out);
        w.row(header_);
        for (const auto& r : rows_) w.row(r);
        return out.str();
    }

private:
    std::vector<std::size_t> column_widths() const {
        std::vector<std::size_t> w(header_.size(), 0);
        for (std::size_t i = 0; i < header_.size(); ++i) w[i] = width(header_[i]);
        for (const auto& r : rows_)
            for (std::size_t i = 0; i < r.size(); ++i) w[i] = std::max(w[i], width(r[i]));
        return w;
    }

    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
    std::vector<std::size_t> rules_;
};

// Thousands separators: 15474 -> "15,474".
inline std::string with_commas(std::size_t n) {
    auto s = std::to_string(n);
    for (int i = static_cast<int>(s.size()) - 3; i > 0; i -= 3) s.insert(static_cast<std::size_t>(i), ",");
    return s;
}

inline std::string percent(double fraction, int decimals = 1) { return fixed(100.0 * fraction, decimals) + "%"; }

} // namespace a2t

#endif // A2T_REPORT_HPP
