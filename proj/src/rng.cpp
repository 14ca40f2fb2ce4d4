#include "styleaug/rng.hpp"

#include <string>

#include "styleaug/digest.hpp"

namespace styleaug {

std::uint64_t stream_seed(std::uint64_t root,
                          std::initializer_list<std::string_view> tags) {
  std::string material = "styleaug-rng|" + std::to_string(root);
  for (std::string_view tag : tags) {
    material.push_back('|');
    material.append(tag);
  }
  auto md = sha256_bytes(material);
  std::uint64_t seed = 0;
  for (int i = 7; i >= 0; --i) seed = (seed << 8) | md[static_cast<std::size_t>(i)];
  return seed;
}

}  // namespace styleaug
