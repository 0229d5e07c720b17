#pragma once

#include "cmex/experiment.hpp"
#include "cmex/generator.hpp"
#include "cmex/io.hpp"
#include "cmex/metrics.hpp"
#include "cmex/model.hpp"
#include "cmex/model_io.hpp"
#include "cmex/probability.hpp"
#include "cmex/propagator.hpp"
#include "cmex/rng.hpp"
#include "cmex/samplers.hpp"
#include "cmex/statespace.hpp"
