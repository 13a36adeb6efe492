#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace vmi {

// FNV-1a, 64-bit: stable content fingerprints for manifests and rerun checks
std::uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a64_hex(std::string_view bytes);

// streamed digest of a file's bytes
std::string file_digest_hex(const std::string& path);

} // namespace vmi
