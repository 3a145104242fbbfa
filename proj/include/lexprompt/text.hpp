#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace lexprompt {

constexpr bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

std::vector<std::string> split_whitespace(std::string_view text);
std::string_view trim(std::string_view s) noexcept;
// ASCII case folding.
std::string casefold(std::string_view s);
// Drops leading and trailing ASCII punctuation and whitespace.
std::string_view strip_punct(std::string_view s) noexcept;

std::string sha256_hex(std::string_view data);

std::string read_text_file(const std::filesystem::path& path);
// Writes via a temporary file and rename so readers never see a partial file.
void write_text_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace lexprompt
