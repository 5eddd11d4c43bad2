#pragma once

// Umbrella header: the full Rasch mixture toolkit.

#include "core_data.hpp"
#include "cml.hpp"
#include "dif.hpp"
#include "esf.hpp"
#include "json_io.hpp"
#include "mixture.hpp"
#include "rng.hpp"
#include "scoredist.hpp"
#include "sim.hpp"
#include "stats.hpp"
#include "svg.hpp"
#include "verbal_aggression.hpp"
