#pragma once

// Umbrella header for the condgen library.

#include "condgen/csv.hpp"
#include "condgen/dataset.hpp"
#include "condgen/degradation.hpp"
#include "condgen/correlation.hpp"
#include "condgen/combined.hpp"
#include "condgen/stochastic.hpp"
#include "condgen/generation.hpp"
#include "condgen/metrics.hpp"
#include "condgen/health_index.hpp"
#include "condgen/reliability.hpp"
#include "condgen/pipeline.hpp"
#include "condgen/validation.hpp"
#include "condgen/fixture.hpp"
