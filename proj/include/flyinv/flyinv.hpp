#pragma once

#include "flyinv/analysis.hpp"
#include "flyinv/circuit.hpp"
#include "flyinv/config_io.hpp"
#include "flyinv/errors.hpp"
#include "flyinv/filter_check.hpp"
#include "flyinv/filter_design.hpp"
#include "flyinv/modulator.hpp"
#include "flyinv/plot.hpp"
#include "flyinv/presets.hpp"
#include "flyinv/simulator.hpp"
#include "flyinv/sweep.hpp"
#include "flyinv/table_io.hpp"
