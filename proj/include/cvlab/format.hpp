#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace cvlab {

/// Shortest decimal string that round-trips to the same double.
/// Non-finite values print as "inf", "-inf" and "nan".
std::string format_double(double v);

/// Writes `content` to a sibling temporary file and renames it over `path`,
/// so a failed run never leaves a partial file behind.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace cvlab
