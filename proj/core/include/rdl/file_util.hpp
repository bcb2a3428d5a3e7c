#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace rdl {

// Writes to "<path>.tmp.<pid>" and renames over `path`, so readers never
// observe a partially written file.
void write_file_atomic(const std::string& path, std::string_view contents);
void write_file_atomic(const std::string& path, const std::vector<std::uint8_t>& contents);

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
std::string read_file_text(const std::string& path);

}  // namespace rdl
