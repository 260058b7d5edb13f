#ifndef MOBISCAPE_CSV_HPP
#define MOBISCAPE_CSV_HPP

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mobiscape/errors.hpp"

namespace mobiscape::csv {

MOBISCAPE_DEFINE_ERROR(FileUnreadable);
MOBISCAPE_DEFINE_ERROR(HeaderMismatch);

// RFC 4180: comma-separated, double-quote quoting, doubled quotes inside
// quoted fields, quoted fields may span lines. CRLF and LF both accepted.
class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    // Next record, or nullopt at end of input. Blank lines are skipped.
    std::optional<std::vector<std::string>> next();

private:
    std::istream& in_;
};

std::string escape(const std::string& field);
void write_row(std::ostream& out, std::span<const std::string> fields);

// Reads and checks the header line. `expected` is the full comma-joined
// header; `alt` (optional) is an accepted alternative, e.g. a form without a
// trailing optional column. Returns the header actually found.
std::vector<std::string> expect_header(Reader& reader, const std::string& expected,
                                       const std::string& alt = "");

// Writes through a sibling temp file and renames into place, so readers never
// observe a half-written stage output.
void atomic_write(const std::filesystem::path& path,
                  const std::function<void(std::ostream&)>& writer);

}  // namespace mobiscape::csv

#endif
