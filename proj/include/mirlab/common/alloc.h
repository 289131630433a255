#pragma once

namespace mirlab {

// Keeps large tensor buffers in the heap instead of returning them to the
// OS after every step. Call once at program start; no-op off glibc.
void tune_allocator();

}  // namespace mirlab
