#pragma once

namespace xray {

// Caps the worker count used by every parallel section. n <= 0 restores the
// machine default (one worker per hardware thread).
void set_num_threads(int n);

int num_threads();

// Hardware threads visible to the process.
int hardware_threads();

}  // namespace xray
