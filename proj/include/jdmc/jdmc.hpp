#pragma once

#include "jdmc/assumptions.hpp"
#include "jdmc/config.hpp"
#include "jdmc/engine.hpp"
#include "jdmc/euler.hpp"
#include "jdmc/harness.hpp"
#include "jdmc/models.hpp"
#include "jdmc/parametrix.hpp"
#include "jdmc/report.hpp"
#include "jdmc/rng.hpp"
#include "jdmc/stats.hpp"
#include "jdmc/types.hpp"
