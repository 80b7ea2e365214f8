// Umbrella header.

#pragma once

#include "dmed/engine.hpp"
#include "dmed/experiment.hpp"
#include "dmed/graph.hpp"
#include "dmed/log.hpp"
#include "dmed/metrics.hpp"
#include "dmed/observation.hpp"
#include "dmed/rng.hpp"
#include "dmed/schedule.hpp"
