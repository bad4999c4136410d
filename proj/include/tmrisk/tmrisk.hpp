#pragma once

#include "tmrisk/error.hpp"
#include "tmrisk/random.hpp"
#include "tmrisk/literals.hpp"
#include "tmrisk/schema.hpp"
#include "tmrisk/csv.hpp"
#include "tmrisk/tsetlin.hpp"
#include "tmrisk/model_io.hpp"
#include "tmrisk/interpret.hpp"
#include "tmrisk/metrics.hpp"
#include "tmrisk/split.hpp"
#include "tmrisk/eortc.hpp"
#include "tmrisk/logistic.hpp"
#include "tmrisk/search.hpp"
#include "tmrisk/synth.hpp"
#include "tmrisk/version.hpp"
