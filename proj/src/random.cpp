#include "uowq/random.hpp"

namespace uowq {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t substream) noexcept {
  std::uint64_t h = mix64(master);
  h = mix64(h ^ (stream + 0x632be59bd9b4e019ULL));
  h = mix64(h ^ (substream + 0x8cb92ba72f3d8dd7ULL));
  return h;
}

Rng make_rng(std::uint64_t master, std::uint64_t stream, std::uint64_t substream) {
  std::seed_seq seq{static_cast<std::uint32_t>(derive_seed(master, stream, substream)),
                    static_cast<std::uint32_t>(derive_seed(master, stream, substream) >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(substream)};
  return Rng(seq);
}

}  // namespace uowq
