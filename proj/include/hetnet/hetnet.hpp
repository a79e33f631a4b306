#pragma once

#include "association.hpp"
#include "experiment.hpp"
#include "generate.hpp"
#include "io.hpp"
#include "load_coupling.hpp"
#include "mis_reduction.hpp"
#include "propagation.hpp"
#include "random.hpp"
#include "scenario.hpp"
#include "tso.hpp"
