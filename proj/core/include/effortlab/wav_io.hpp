#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "effortlab/waveform.hpp"

namespace effortlab::wav {

enum class SampleFormat { kPcm16, kFloat32 };

Waveform Read(const std::filesystem::path& path);
Waveform Decode(const std::vector<unsigned char>& bytes);

// PCM16 output rounds to nearest and saturates at full scale.
std::vector<unsigned char> Encode(const Waveform& w, SampleFormat format = SampleFormat::kPcm16);

// Writes via a temporary sibling file and rename, so readers never see a
// partial file.
void Write(const std::filesystem::path& path, const Waveform& w,
           SampleFormat format = SampleFormat::kPcm16);

}  // namespace effortlab::wav
