#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace dqring::io {

/// Shortest round-trip decimal form ("%.17g"); keeps CSV output bit-stable.
std::string format_double(double v);

/// Builds CSV text in memory; rows are committed to disk in one write so a
/// file is never observed half-written.
class CsvBuilder {
  public:
    explicit CsvBuilder(const std::vector<std::string>& header);

    void begin_row();
    void add(const std::string& v);
    void add(double v);
    void add(long long v);
    void add(int v) { add(static_cast<long long>(v)); }

    const std::string& text();

  private:
    std::string text_;
    std::size_t columns_;
    std::size_t row_cells_ = 0;
    bool in_row_ = false;
    void end_row();
};

std::uint64_t fnv1a64(const std::string& data);
std::string hex64(std::uint64_t v);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace dqring::io
