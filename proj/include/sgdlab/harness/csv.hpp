// SPDX-License-Identifier: Apache-2.0
//
// Minimal CSV emission with shortest round-trip float formatting.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sgdlab::harness {

/// Shortest decimal that parses back to the same double; "nan", "inf", "-inf"
/// for non-finite values.
std::string format_double(double v);

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);

    CsvTable& cell(double v);
    CsvTable& cell(std::uint64_t v);
    CsvTable& cell(std::optional<double> v);  // nullopt: empty field
    CsvTable& empty();
    /// Closes the current row. Throws InvalidArgument on a column count mismatch.
    void end_row();

    std::size_t rows() const noexcept { return rows_; }
    const std::string& str() const noexcept { return text_; }

private:
    void push(std::string_view field);

    std::size_t columns_;
    std::size_t pending_ = 0;
    std::size_t rows_ = 0;
    std::string text_;
};

/// Writes `content` atomically enough for our purposes: to a temporary
/// sibling, then renamed over the target.
void write_file(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

}  // namespace sgdlab::harness
