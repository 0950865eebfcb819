#pragma once

#if defined(__SSE__) || defined(__x86_64__)
#include <xmmintrin.h>
#endif

namespace ads {

// Flush-to-zero / denormals-are-zero for the lifetime of the guard. Amplitude
// tails decaying through the subnormal range otherwise cost ~100x per flop.
class ScopedFlushToZero {
 public:
  ScopedFlushToZero() {
#if defined(__SSE__) || defined(__x86_64__)
    saved_ = _mm_getcsr();
    _mm_setcsr(saved_ | 0x8040u);
#endif
  }
  ~ScopedFlushToZero() {
#if defined(__SSE__) || defined(__x86_64__)
    _mm_setcsr(saved_);
#endif
  }
  ScopedFlushToZero(const ScopedFlushToZero&) = delete;
  ScopedFlushToZero& operator=(const ScopedFlushToZero&) = delete;

 private:
  unsigned saved_ = 0;
};

}  // namespace ads
