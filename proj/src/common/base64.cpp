#include "easyrl/common/base64.hpp"

#include <boost/beast/core/detail/base64.hpp>

#include "easyrl/common/error.hpp"

namespace easyrl {

namespace b64 = boost::beast::detail::base64;

std::string base64Encode(const std::vector<std::uint8_t>& bytes) {
  std::string out(b64::encoded_size(bytes.size()), '\0');
  out.resize(b64::encode(out.data(), bytes.data(), bytes.size()));
  return out;
}

std::vector<std::uint8_t> base64Decode(std::string_view text) {
  if (text.size() % 4 != 0) fail(ErrorCode::Format, "base64 length is not a multiple of 4");
  std::vector<std::uint8_t> out(b64::decoded_size(text.size()));
  std::size_t body = text.size();
  for (int pad = 0; pad < 2 && body > 0 && text[body - 1] == '='; ++pad) --body;
  auto [written, read] = b64::decode(out.data(), text.data(), body);
  if (read != body) fail(ErrorCode::Format, "invalid base64 input");
  out.resize(written);
  return out;
}

}  // namespace easyrl
