#include "mfc/serialize.hpp"

#include <cstring>
#include <stdexcept>

namespace mfc {

namespace {

constexpr char kTable[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int decode_char(char c) {
  if (c >= 'A' && c <= 'Z')
    return c - 'A';
  if (c >= 'a' && c <= 'z')
    return c - 'a' + 26;
  if (c >= '0' && c <= '9')
    return c - '0' + 52;
  if (c == '+')
    return 62;
  if (c == '/')
    return 63;
  return -1;
}

} // namespace

std::string base64_encode(const std::uint8_t *data, std::size_t len) {
  std::string out;
  out.reserve((len + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= len; i += 3) {
    const std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2];
    out.push_back(kTable[(v >> 18) & 63]);
    out.push_back(kTable[(v >> 12) & 63]);
    out.push_back(kTable[(v >> 6) & 63]);
    out.push_back(kTable[v & 63]);
  }
  const std::size_t rest = len - i;
  if (rest == 1) {
    const std::uint32_t v = data[i] << 16;
    out.push_back(kTable[(v >> 18) & 63]);
    out.push_back(kTable[(v >> 12) & 63]);
    out.push_back('=');
    out.push_back('=');
  } else if (rest == 2) {
    const std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8);
    out.push_back(kTable[(v >> 18) & 63]);
    out.push_back(kTable[(v >> 12) & 63]);
    out.push_back(kTable[(v >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(const std::string &text) {
  if (text.size() % 4 != 0)
    throw std::invalid_argument("base64_decode: length not a multiple of 4");
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    int vals[4] = {0, 0, 0, 0};
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      const char c = text[i + k];
      if (c == '=') {
        ++pad;
        vals[k] = 0;
      } else {
        vals[k] = decode_char(c);
        if (vals[k] < 0 || pad > 0)
          throw std::invalid_argument("base64_decode: invalid character");
      }
    }
    const std::uint32_t v = (vals[0] << 18) | (vals[1] << 12) |
                            (vals[2] << 6) | vals[3];
    out.push_back((v >> 16) & 0xFF);
    if (pad < 2)
      out.push_back((v >> 8) & 0xFF);
    if (pad < 1)
      out.push_back(v & 0xFF);
  }
  return out;
}

std::string vec_to_base64(const VecX &v) {
  return base64_encode(reinterpret_cast<const std::uint8_t *>(v.data()),
                       static_cast<std::size_t>(v.size()) * sizeof(Scalar));
}

VecX base64_to_vec(const std::string &text) {
  const std::vector<std::uint8_t> bytes = base64_decode(text);
  if (bytes.size() % sizeof(Scalar) != 0)
    throw std::invalid_argument("base64_to_vec: byte count mismatch");
  VecX v(bytes.size() / sizeof(Scalar));
  std::memcpy(v.data(), bytes.data(), bytes.size());
  return v;
}

} // namespace mfc
