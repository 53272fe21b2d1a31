// SPDX-License-Identifier: Apache-2.0
#include "sgdlab/harness/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sgdlab/error.hpp"

namespace sgdlab::harness {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

CsvTable::CsvTable(std::vector<std::string> header) : columns_(header.size()) {
    for (const auto& h : header) push(h);
    text_ += '\n';
    pending_ = 0;
}

void CsvTable::push(std::string_view field) {
    if (pending_ > 0) text_ += ',';
    text_ += field;
    ++pending_;
}

CsvTable& CsvTable::cell(double v) {
    push(format_double(v));
    return *this;
}

CsvTable& CsvTable::cell(std::uint64_t v) {
    push(std::to_string(v));
    return *this;
}

CsvTable& CsvTable::cell(std::optional<double> v) {
    return v ? cell(*v) : empty();
}

CsvTable& CsvTable::empty() {
    push("");
    return *this;
}

void CsvTable::end_row() {
    if (pending_ != columns_)
        throw InvalidArgument("csv row has " + std::to_string(pending_) + " fields, expected " +
                              std::to_string(columns_));
    text_ += '\n';
    pending_ = 0;
    ++rows_;
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw Error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace sgdlab::harness
