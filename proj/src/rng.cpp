#include "multinex/rng.hpp"

// Header-only; kept as a TU anchor.
