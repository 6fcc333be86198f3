#pragma once

#include "stitchwalk/dist_check.hpp"
#include "stitchwalk/distribution.hpp"
#include "stitchwalk/experiments.hpp"
#include "stitchwalk/generators.hpp"
#include "stitchwalk/graph.hpp"
#include "stitchwalk/rng.hpp"
#include "stitchwalk/routing.hpp"
#include "stitchwalk/short_walks.hpp"
#include "stitchwalk/sim.hpp"
#include "stitchwalk/walk_engine.hpp"
