#include "evotext/rng.hpp"

#include <sstream>
#include <stdexcept>

namespace evotext {

uint64_t SeededRng::below(uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("SeededRng::below: bound must be > 0");
  // Rejection sampling over the largest multiple of bound.
  const uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit && limit != 0);
  return x % bound;
}

std::string SeededRng::save_state() const {
  std::ostringstream out;
  out << engine_;
  return out.str();
}

void SeededRng::restore_state(const std::string& state) {
  std::istringstream in(state);
  in >> engine_;
  if (in.fail()) throw std::invalid_argument("SeededRng: malformed engine state");
}

uint64_t fnv1a64(const std::string& data) {
  uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hash_hex(uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<size_t>(i)] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

}  // namespace evotext
