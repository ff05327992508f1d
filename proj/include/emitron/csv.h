#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace emitron {

namespace fs = std::filesystem;

// Minimal comma separated reader: header line required, no quoting,
// blank and '#' comment lines skipped, '\r' and a leading UTF-8 BOM tolerated.
class CsvReader
{
public:
    explicit CsvReader(const fs::path& path);
    CsvReader(std::unique_ptr<std::istream> stream, std::string sourceName);

    static CsvReader from_string(std::string text, std::string sourceName = "<memory>");

    const std::vector<std::string>& header() const noexcept { return _header; }
    std::optional<std::size_t> column_index(std::string_view name) const;
    std::size_t required_column(std::string_view name) const;

    // Advances to the next data row; false at end of input.
    bool next();

    std::size_t field_count() const noexcept { return _fields.size(); }
    std::string_view field(std::size_t index) const;
    bool has_field(std::size_t index) const noexcept { return index < _fields.size() && !_fields[index].empty(); }

    double to_double(std::size_t index) const;
    std::int64_t to_int(std::size_t index) const;

    // 1-based physical line number of the current row (header is line 1).
    std::size_t line_number() const noexcept { return _lineNr; }
    const std::string& source_name() const noexcept { return _sourceName; }

private:
    void read_header();

    std::unique_ptr<std::istream> _stream;
    std::string _sourceName;
    std::vector<std::string> _header;
    std::string _line;
    std::vector<std::string_view> _fields;
    std::size_t _lineNr = 0;
};

std::vector<std::string_view> split(std::string_view text, char separator);
std::string_view trim(std::string_view text);

std::optional<double> parse_double(std::string_view text);
std::optional<std::int64_t> parse_int(std::string_view text);

// Writes to "<path>.tmp" and renames into place, so readers never observe a
// partially written artifact.
void write_file_atomic(const fs::path& path, std::string_view content);

std::string read_file(const fs::path& path);

}
