#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace effortlab {

std::string ReadTextFile(const std::filesystem::path& path);
std::vector<unsigned char> ReadBinaryFile(const std::filesystem::path& path);

// Temp file in the destination directory, then rename over the target.
void WriteFileAtomic(const std::filesystem::path& path, std::string_view contents);
void WriteFileAtomic(const std::filesystem::path& path, const std::vector<unsigned char>& contents);

// Stable 64-bit FNV-1a; used wherever a seed or identifier must not depend
// on the standard library's std::hash.
std::uint64_t Fnv1a64(std::string_view data, std::uint64_t basis = 14695981039346656037ull) noexcept;

}  // namespace effortlab
