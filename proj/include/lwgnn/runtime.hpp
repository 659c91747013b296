#pragma once

namespace lwgnn {

// Keeps large freed blocks inside the heap instead of returning them to the OS, so the
// per-iteration N×(c+1)p temporaries do not page-fault on every allocation. No-op outside glibc.
void configure_allocator();

}  // namespace lwgnn
