#pragma once

#include "pclab/core.hpp"
#include "pclab/density.hpp"
#include "pclab/ds.hpp"
#include "pclab/eval.hpp"
#include "pclab/parallel.hpp"
#include "pclab/protocol.hpp"
#include "pclab/protocol_io.hpp"
#include "pclab/rng.hpp"
#include "pclab/script.hpp"
#include "pclab/upper_bounds.hpp"

namespace pclab {
inline constexpr const char* kVersion = PCLAB_VERSION;
}
