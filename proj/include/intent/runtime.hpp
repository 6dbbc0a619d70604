#pragma once

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace intent {

/// Keeps freed heap memory in the process. Every training step builds and
/// drops a whole tape; with glibc's defaults the heap is trimmed and
/// re-faulted each time, which costs about 40% of a step. Call once from
/// main; a no-op outside glibc.
inline void retain_heap_memory() {
#if defined(__GLIBC__)
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
#endif
}

}  // namespace intent
