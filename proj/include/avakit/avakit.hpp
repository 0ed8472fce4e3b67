#pragma once

#include "avakit/balancing.hpp"
#include "avakit/cooccurrence.hpp"
#include "avakit/csv.hpp"
#include "avakit/error.hpp"
#include "avakit/evaluation.hpp"
#include "avakit/keyvalue.hpp"
#include "avakit/rng.hpp"
#include "avakit/sampling.hpp"
#include "avakit/stats.hpp"
#include "avakit/synth.hpp"
#include "avakit/types.hpp"
