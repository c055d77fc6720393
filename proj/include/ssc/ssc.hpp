#pragma once

#include "ssc/types.hpp"
#include "ssc/random.hpp"
#include "ssc/estimation.hpp"
#include "ssc/objective.hpp"
#include "ssc/matching.hpp"
#include "ssc/solver.hpp"
#include "ssc/datagen.hpp"
#include "ssc/metrics.hpp"
#include "ssc/io.hpp"
