#pragma once

#include <filesystem>

#include "dynnet/dataio/trialset.hpp"

namespace dynnet::data {

/// Reads a manifest with header `file,label,subject,session` where session
/// is `train`/`test` (or 0/1) and each file holds one trial as a CSV matrix
/// with one row per channel. Relative files resolve against the manifest's
/// directory.
TrialSet import_csv_manifest(const std::filesystem::path& manifest, double fs);

}  // namespace dynnet::data
