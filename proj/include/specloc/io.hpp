#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace specloc::io {

/// Render a double with 17 significant digits (%.17g), enough to
/// round-trip the exact value. NaN and infinities print as "nan"/"inf".
std::string format_double(double value);

/// Accumulates one CSV file in memory; all doubles go through
/// format_double so outputs are bit-reproducible.
class Csv {
public:
    explicit Csv(std::vector<std::string> columns);

    Csv& cell(double value);
    Csv& cell(int value);
    Csv& cell(long value);
    Csv& cell(const std::string& value);
    void end_row();

    const std::string& text() const { return text_; }

private:
    std::string text_;
    std::size_t columns_ = 0;
    std::size_t in_row_ = 0;
};

/// Write via a temporary name in the same directory, then rename, so an
/// interrupted run never leaves a truncated file at the target path.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_text(const std::filesystem::path& path);

/// Current UTC time as e.g. "2026-01-31T09:15:02Z".
std::string utc_timestamp();

} // namespace specloc::io
