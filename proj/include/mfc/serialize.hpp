#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mfc/types.hpp"

namespace mfc {

std::string base64_encode(const std::uint8_t *data, std::size_t len);
std::vector<std::uint8_t> base64_decode(const std::string &text);

// Bit-exact vector round trip: raw little-endian IEEE-754 bytes in base64.
std::string vec_to_base64(const VecX &v);
VecX base64_to_vec(const std::string &text);

} // namespace mfc
