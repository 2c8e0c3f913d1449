#pragma once

#include <string>

#include "frugal/network.hpp"

namespace frugal {

// Binary parameter dump: a magic header, then each parameter tensor with its
// name, shape, and raw doubles. Native byte order; meant for same-machine
// round trips, not interchange.
void save_checkpoint(const std::string& path, Network& net);

// Restores parameters into an already-built network. Names and shapes must
// match exactly.
void load_checkpoint(const std::string& path, Network& net);

}  // namespace frugal
