#include "slcp/random.h"

#include <bit>
#include <vector>

namespace slcp {
namespace {

std::mt19937_64 MakeEngine(std::uint64_t seed,
                           std::initializer_list<std::uint64_t> stream) {
  std::vector<std::uint32_t> words;
  words.reserve(2 * (stream.size() + 1));
  auto push = [&words](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(seed);
  for (std::uint64_t v : stream) push(v);
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

}  // namespace

Rng::Rng(std::uint64_t seed) : engine_(MakeEngine(seed, {})) {}

Rng::Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream)
    : engine_(MakeEngine(seed, stream)) {}

double Rng::Uniform() {
  const std::uint64_t bits = engine_() >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double Rng::Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

std::uint64_t StreamKey(double value) { return std::bit_cast<std::uint64_t>(value); }

}  // namespace slcp
