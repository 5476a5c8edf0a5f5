#pragma once

#include <string>

#include "aberrasim/inn/network.hpp"

namespace aberrasim {

/// Network weight container, magic "CINN": version, a JSON header naming
/// the block count, channel counts, subnet layout, construction seed and
/// every weight blob (name + shape) in order, then the float32
/// little-endian blob data in exactly that order.  Mixing inverses are
/// recomputed on load, so only the forward matrices are stored.
void save_inn(const ConditionalINN<float>& net, const std::string& path);
ConditionalINN<float> load_inn(const std::string& path);

}  // namespace aberrasim
