#include "mobiscape/csv.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace mobiscape::csv {

std::optional<std::vector<std::string>> Reader::next() {
    std::vector<std::string> fields;
    std::string field;
    bool in_quotes = false;
    bool saw_any = false;

    int ci;
    while ((ci = in_.get()) != std::char_traits<char>::eof()) {
        char c = static_cast<char>(ci);
        if (in_quotes) {
            if (c == '"') {
                if (in_.peek() == '"') {
                    in_.get();
                    field.push_back('"');
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
            saw_any = true;
            continue;
        }
        switch (c) {
            case '"':
                in_quotes = true;
                saw_any = true;
                break;
            case ',':
                fields.push_back(std::move(field));
                field.clear();
                saw_any = true;
                break;
            case '\r':
                break;  // handled with the following '\n', or ignored
            case '\n':
                if (!saw_any) {
                    // blank line: keep scanning
                    fields.clear();
                    field.clear();
                    continue;
                }
                fields.push_back(std::move(field));
                return fields;
            default:
                field.push_back(c);
                saw_any = true;
        }
    }
    if (!saw_any) return std::nullopt;
    fields.push_back(std::move(field));
    return fields;
}

std::string escape(const std::string& field) {
    bool needs_quotes = field.find_first_of(",\"\r\n") != std::string::npos;
    if (!needs_quotes) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void write_row(std::ostream& out, std::span<const std::string> fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out.put(',');
        out << escape(fields[i]);
    }
    out.put('\n');
}

static std::string join(const std::vector<std::string>& fields) {
    std::string s;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) s.push_back(',');
        s += fields[i];
    }
    return s;
}

std::vector<std::string> expect_header(Reader& reader, const std::string& expected,
                                       const std::string& alt) {
    auto row = reader.next();
    if (!row) throw HeaderMismatch("empty file, expected header: " + expected);
    std::string got = join(*row);
    if (got != expected && (alt.empty() || got != alt))
        throw HeaderMismatch("bad header: got '" + got + "', expected '" + expected + "'");
    return *row;
}

void atomic_write(const std::filesystem::path& path,
                  const std::function<void(std::ostream&)>& writer) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw FileUnreadable("cannot write: " + tmp.string());
        writer(out);
        out.flush();
        if (!out) throw Error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace mobiscape::csv
