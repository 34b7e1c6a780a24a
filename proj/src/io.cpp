#include "dqring/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dqring::io {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

CsvBuilder::CsvBuilder(const std::vector<std::string>& header) : columns_(header.size()) {
    if (header.empty()) throw std::invalid_argument("CsvBuilder: empty header");
    for (std::size_t k = 0; k < header.size(); ++k) {
        if (k) text_ += ',';
        text_ += header[k];
    }
    text_ += '\n';
}

void CsvBuilder::begin_row() {
    if (in_row_) end_row();
    in_row_ = true;
    row_cells_ = 0;
}

void CsvBuilder::end_row() {
    if (row_cells_ != columns_) throw std::logic_error("CsvBuilder: row width mismatch");
    text_ += '\n';
    in_row_ = false;
}

void CsvBuilder::add(const std::string& v) {
    if (!in_row_) throw std::logic_error("CsvBuilder: add outside a row");
    if (row_cells_) text_ += ',';
    text_ += v;
    ++row_cells_;
}

void CsvBuilder::add(double v) { add(format_double(v)); }

void CsvBuilder::add(long long v) { add(std::to_string(v)); }

const std::string& CsvBuilder::text() {
    if (in_row_) end_row();
    return text_;
}

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace dqring::io
