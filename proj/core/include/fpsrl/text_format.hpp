#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

// Helpers for the line-delimited record formats. Numbers are written in the
// shortest decimal form that round-trips to the same double.

namespace fpsrl::text {

std::string number(double v);
std::string number_array(std::span<const double> values);
std::string quoted(std::string_view s);

/// 64-bit FNV-1a, used for config fingerprints in manifests.
std::uint64_t fnv1a(std::string_view data);
std::string hex64(std::uint64_t v);

/// Reads a whole file; throws LoadError if it cannot be opened.
std::string read_file(const std::string& path);
/// Writes atomically enough for our purposes (truncate + write).
void write_file(const std::string& path, std::string_view contents);

}  // namespace fpsrl::text
