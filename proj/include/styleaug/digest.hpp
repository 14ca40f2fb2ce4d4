#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace styleaug {

std::array<unsigned char, 32> sha256_bytes(std::string_view data);
std::string sha256_hex(std::string_view data);
std::string sha256_file_hex(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace styleaug
