#include "dyadic/parallel.hpp"

namespace dyadic {
namespace {

std::atomic<unsigned> configured_threads{0};

}  // namespace

void set_thread_count(unsigned threads) { configured_threads.store(threads); }

unsigned thread_count() {
  const unsigned configured = configured_threads.load();
  if (configured != 0) return configured;
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace dyadic
