#ifndef A2T_IO_HPP
#define A2T_IO_HPP

// File plumbing shared by every module: CSV (RFC 4180), JSON Lines,
// whole-file reads, and SHA-256 digests for manifests and caches.

#include <a2t/error.hpp>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <functional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace a2t {

using json = nlohmann::json;

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail_data("file_unreadable", "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail_data("file_unwritable", "cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) fail_data("file_unwritable", "short write to " + path.string());
}

inline std::string to_hex(std::span<const unsigned char> bytes) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (unsigned char b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xf]);
    }
    return out;
}

inline std::string sha256_hex(std::string_view data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
        fail_data("digest_failed", "SHA-256 computation failed");
    return to_hex(std::span<const unsigned char>(md.data(), len));
}

inline std::string sha256_file(const std::filesystem::path& path) {
    return sha256_hex(read_file(path));
}

// Collapse whitespace runs to one space and trim both ends.
inline std::string normalize_whitespace(std::string_view s) {
    std::string out;
    bool pending_space = false;
    for (char c : s) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(c);
    }
    return out;
}

// printf-style fixed formatting; locale independent for the "C" locale the
// tools run under.
inline std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

// Shortest representation that round-trips through strtod.
inline std::string exact(double v) {
    char buf[64];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

// --- CSV -------------------------------------------------------------------

using CsvRow = std::vector<std::string>;

struct CsvTable {
    CsvRow header;
    std::vector<CsvRow> rows;
    std::vector<std::size_t> line_numbers;  // 1-based source line of each row

    std::size_t column(std::string_view name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        fail_data("csv_missing_column", "CSV is missing column '" + std::string(name) + "'");
    }

    bool has_column(std::string_view name) const {
        for (const auto& h : header)
            if (h == name) return true;
        return false;
    }
};

inline std::vector<CsvRow> parse_csv_rows(std::string_view text,
                                          std::vector<std::size_t>* line_numbers = nullptr) {
    std::vector<CsvRow> rows;
    CsvRow row;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    std::size_t line = 1;
    std::size_t row_line = 1;

    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_row = [&] {
        end_field();
        if (!(row.size() == 1 && row[0].empty())) {
            rows.push_back(std::move(row));
            if (line_numbers) line_numbers->push_back(row_line);
        }
        row.clear();
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
        case '"':
            if (field_started || !field.empty())
                fail_data("csv_malformed", "stray quote on line " + std::to_string(line));
            in_quotes = true;
            field_started = true;
            break;
        case ',':
            end_field();
            break;
        case '\r':
            break;
        case '\n':
            end_row();
            ++line;
            row_line = line;
            break;
        default:
            field.push_back(c);
        }
    }
    if (in_quotes) fail_data("csv_malformed", "unterminated quoted field at line " + std::to_string(row_line));
    if (!field.empty() || !row.empty() || field_started) end_row();
    return rows;
}

inline CsvTable parse_csv(std::string_view text) {
    CsvTable t;
    auto rows = parse_csv_rows(text, &t.line_numbers);
    if (rows.empty()) return t;
    t.header = std::move(rows.front());
    t.rows.assign(std::make_move_iterator(rows.begin() + 1), std::make_move_iterator(rows.end()));
    t.line_numbers.erase(t.line_numbers.begin());
    for (std::size_t i = 0; i < t.rows.size(); ++i)
        if (t.rows[i].size() != t.header.size())
            fail_data("csv_malformed", "line " + std::to_string(t.line_numbers[i]) + ": expected " +
                                           std::to_string(t.header.size()) + " fields, got " +
                                           std::to_string(t.rows[i].size()));
    return t;
}

inline std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}

    CsvWriter& row(std::initializer_list<std::string_view> fields) {
        bool first = true;
        for (auto f : fields) {
            if (!first) out_ << ',';
            out_ << csv_escape(f);
            first = false;
        }
        out_ << '\n';
        return *this;
    }

    CsvWriter& row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            out_ << csv_escape(fields[i]);
        }
        out_ << '\n';
        return *this;
    }

private:
    std::ostream& out_;
};

// --- JSON Lines -------------------------------------------------------------

// Calls fn(object, line_number) for every non-blank line.
inline void for_each_jsonl(std::string_view text,
                           const std::function<void(const json&, std::size_t)>& fn) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const auto line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        ++line_no;
        if (line.find_first_not_of(" \t\r") != std::string_view::npos) {
            json obj;
            try {
                obj = json::parse(line);
            } catch (const json::parse_error& e) {
                fail_data("jsonl_malformed", "line " + std::to_string(line_no) + ": " + e.what());
            }
            fn(obj, line_no);
        }
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
}

inline std::string to_jsonl(const std::vector<json>& objects) {
    std::string out;
    for (const auto& o : objects) {
        out += o.dump();
        out += '\n';
    }
    return out;
}

// Wraps json accessors so a wrong type reports the offending field and line.
template <typename T>
T field_as(const json& obj, const char* key, std::size_t line_no) {
    const auto it = obj.find(key);
    if (it == obj.end())
        fail_data("missing_field", "line " + std::to_string(line_no) + ": missing field '" + key + "'");
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        fail_data("bad_field", "line " + std::to_string(line_no) + ": field '" + key + "' has wrong type");
    }
}

inline double parse_double(std::string_view s, std::string_view what) {
    std::string tmp(s);
    char* end = nullptr;
    const double v = std::strtod(tmp.c_str(), &end);
    if (tmp.empty() || end != tmp.c_str() + tmp.size() || !std::isfinite(v))
        fail_data("bad_number", "cannot parse " + std::string(what) + " '" + tmp + "' as a finite number");
    return v;
}

inline long long parse_int(std::string_view s, std::string_view what) {
    std::string tmp(s);
    char* end = nullptr;
    const long long v = std::strtoll(tmp.c_str(), &end, 10);
    if (tmp.empty() || end != tmp.c_str() + tmp.size())
        fail_data("bad_integer", "cannot parse " + std::string(what) + " '" + tmp + "' as an integer");
    return v;
}

} // namespace a2t

#endif // A2T_IO_HPP
