#include "specloc/io.hpp"

#include "specloc/errors.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

namespace specloc::io {

std::string format_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

Csv::Csv(std::vector<std::string> columns) : columns_(columns.size()) {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i) text_ += ',';
        text_ += columns[i];
    }
    text_ += '\n';
}

Csv& Csv::cell(double value) { return cell(format_double(value)); }
Csv& Csv::cell(int value) { return cell(std::to_string(value)); }
Csv& Csv::cell(long value) { return cell(std::to_string(value)); }

Csv& Csv::cell(const std::string& value) {
    if (in_row_) text_ += ',';
    text_ += value;
    ++in_row_;
    return *this;
}

void Csv::end_row() {
    if (in_row_ != columns_)
        throw ValidationError("csv row has " + std::to_string(in_row_) + " cells, expected " +
                              std::to_string(columns_));
    text_ += '\n';
    in_row_ = 0;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
        out << content;
        if (!out) throw IoError("write failed for '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename '" + tmp.string() + "' to '" + path.string() +
                          "': " + ec.message());
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string utc_timestamp() {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace specloc::io
