#pragma once

#include "icnte/common.hpp"
#include "icnte/engine.hpp"
#include "icnte/experiment.hpp"
#include "icnte/kpaths.hpp"
#include "icnte/minmlu.hpp"
#include "icnte/policies.hpp"
#include "icnte/rng.hpp"
#include "icnte/simplex.hpp"
#include "icnte/topology.hpp"
#include "icnte/traffic.hpp"
