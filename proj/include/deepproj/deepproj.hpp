#pragma once

#include "deepproj/bench.hpp"
#include "deepproj/data.hpp"
#include "deepproj/error.hpp"
#include "deepproj/metrics.hpp"
#include "deepproj/model_io.hpp"
#include "deepproj/network.hpp"
#include "deepproj/numerics.hpp"
#include "deepproj/plot.hpp"
#include "deepproj/projections.hpp"
#include "deepproj/rng.hpp"
#include "deepproj/training.hpp"
