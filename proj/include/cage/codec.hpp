#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cage::codec {

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

std::uint32_t crc32(std::span<const std::uint8_t> bytes);
std::uint32_t crc32(std::string_view text);
std::string crc32_hex(std::span<const std::uint8_t> bytes);

// Stable 64-bit mix of a base seed and a key; identical across runs and platforms.
std::uint64_t derive_seed(std::uint64_t base, std::string_view key);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);
void write_file(const std::string& path, std::string_view text);
std::string read_text_file(const std::string& path);

}  // namespace cage::codec
