#include "emitron/csv.h"
#include "emitron/error.h"

#include <charconv>
#include <fstream>
#include <sstream>

namespace emitron {

std::vector<std::string_view> split(std::string_view text, char separator)
{
    std::vector<std::string_view> result;
    std::size_t start = 0;
    while (true) {
        auto pos = text.find(separator, start);
        if (pos == std::string_view::npos) {
            result.push_back(trim(text.substr(start)));
            break;
        }
        result.push_back(trim(text.substr(start, pos - start)));
        start = pos + 1;
    }
    return result;
}

std::string_view trim(std::string_view text)
{
    constexpr std::string_view whitespace = " \t\r\n";
    auto first = text.find_first_not_of(whitespace);
    if (first == std::string_view::npos) {
        return {};
    }
    auto last = text.find_last_not_of(whitespace);
    return text.substr(first, last - first + 1);
}

std::optional<double> parse_double(std::string_view text)
{
    text = trim(text);
    if (text.empty()) {
        return {};
    }
    if (text.front() == '+') {
        text.remove_prefix(1);
    }

    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        return {};
    }
    return value;
}

std::optional<std::int64_t> parse_int(std::string_view text)
{
    text = trim(text);
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
        return {};
    }
    return value;
}

CsvReader::CsvReader(const fs::path& path)
: _sourceName(path.string())
{
    auto file = std::make_unique<std::ifstream>(path, std::ios::binary);
    if (!file->is_open()) {
        throw InputError("Failed to open '{}'", path.string());
    }
    _stream = std::move(file);
    read_header();
}

CsvReader::CsvReader(std::unique_ptr<std::istream> stream, std::string sourceName)
: _stream(std::move(stream))
, _sourceName(std::move(sourceName))
{
    read_header();
}

CsvReader CsvReader::from_string(std::string text, std::string sourceName)
{
    return CsvReader(std::make_unique<std::istringstream>(std::move(text)), std::move(sourceName));
}

void CsvReader::read_header()
{
    while (std::getline(*_stream, _line)) {
        ++_lineNr;
        if (_lineNr == 1 && _line.starts_with("\xEF\xBB\xBF")) {
            _line.erase(0, 3);
        }
        if (trim(_line).empty() || _line.starts_with('#')) {
            continue;
        }
        for (auto name : split(_line, ',')) {
            _header.emplace_back(name);
        }
        return;
    }

    throw InputError("'{}' has no header line", _sourceName);
}

std::optional<std::size_t> CsvReader::column_index(std::string_view name) const
{
    for (std::size_t i = 0; i < _header.size(); ++i) {
        if (_header[i] == name) {
            return i;
        }
    }
    return {};
}

std::size_t CsvReader::required_column(std::string_view name) const
{
    if (auto index = column_index(name); index.has_value()) {
        return *index;
    }
    throw InputError("Missing column '{}' in '{}'", name, _sourceName);
}

bool CsvReader::next()
{
    while (std::getline(*_stream, _line)) {
        ++_lineNr;
        if (trim(_line).empty() || _line.starts_with('#')) {
            continue;
        }
        _fields = split(_line, ',');
        return true;
    }
    _fields.clear();
    return false;
}

std::string_view CsvReader::field(std::size_t index) const
{
    if (index >= _fields.size()) {
        throw ValidationError("{}:{}: expected at least {} fields, found {}", _sourceName, _lineNr, index + 1, _fields.size());
    }
    return _fields[index];
}

double CsvReader::to_double(std::size_t index) const
{
    auto text = field(index);
    if (auto value = parse_double(text); value.has_value()) {
        return *value;
    }
    throw ValidationError("{}:{}: invalid number '{}' in column '{}'", _sourceName, _lineNr, text, index < _header.size() ? _header[index] : "?");
}

std::int64_t CsvReader::to_int(std::size_t index) const
{
    auto text = field(index);
    if (auto value = parse_int(text); value.has_value()) {
        return *value;
    }
    throw ValidationError("{}:{}: invalid integer '{}' in column '{}'", _sourceName, _lineNr, text, index < _header.size() ? _header[index] : "?");
}

void write_file_atomic(const fs::path& path, std::string_view content)
{
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }

    auto tmpPath = path;
    tmpPath += ".tmp";
    {
        std::ofstream out(tmpPath, std::ios::binary | std::ios::trunc);
        if (!out.is_open()) {
            throw InputError("Failed to create '{}'", tmpPath.string());
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) {
            throw RuntimeError("Failed to write '{}'", tmpPath.string());
        }
    }
    fs::rename(tmpPath, path);
}

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in.is_open()) {
        throw InputError("Failed to open '{}'", path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}
