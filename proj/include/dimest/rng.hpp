#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace dimest {

using Rng = std::mt19937_64;

// Independent stream for (master seed, id_1, id_2, ...). Streams depend only on the ids,
// never on scheduling, so parallel trials reproduce serial ones bit for bit.
inline Rng make_stream(std::uint64_t master_seed, std::initializer_list<std::uint64_t> ids = {}) {
  std::vector<std::uint32_t> words;
  words.reserve(2 * (ids.size() + 1));
  auto push = [&words](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(master_seed);
  for (auto id : ids) push(id);
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

}  // namespace dimest
