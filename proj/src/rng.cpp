#include "msgp/rng.hpp"

#include <sstream>

#include "msgp/error.hpp"

namespace msgp {

std::string Rng::save() const {
  std::ostringstream out;
  out << engine_ << ' ' << normal_;
  return out.str();
}

void Rng::load(const std::string& state) {
  std::istringstream in(state);
  in >> engine_ >> normal_;
  if (!in) fail(ErrorKind::data, "corrupt RNG state in checkpoint");
}

std::uint64_t Rng::derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over (seed, stream)
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace msgp
