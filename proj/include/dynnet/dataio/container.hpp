#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "dynnet/dataio/trialset.hpp"

namespace dynnet::data {

// Little-endian layout: "EEGT", u32 version, u32 n_trials, u32 n_channels,
// u32 n_samples, f32 fs, u8 labels[n], u8 subjects[n], u8 sessions[n],
// f32 samples[n][channels][samples].
inline constexpr char kContainerMagic[4] = {'E', 'E', 'G', 'T'};
inline constexpr std::uint32_t kContainerVersion = 1;

std::string encode_container(const TrialSet& set);
TrialSet decode_container(const std::string& bytes);

void write_container(const TrialSet& set, const std::filesystem::path& path);
TrialSet read_container(const std::filesystem::path& path);

}  // namespace dynnet::data
