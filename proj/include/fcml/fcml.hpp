#pragma once

#include "fcml/schedule.hpp"
#include "fcml/params.hpp"
#include "fcml/switch_set.hpp"
#include "fcml/modulator.hpp"
#include "fcml/zvs_scheduler.hpp"
#include "fcml/plant.hpp"
#include "fcml/control.hpp"
#include "fcml/scenario.hpp"
#include "fcml/simulation.hpp"
#include "fcml/analysis.hpp"
#include "fcml/io.hpp"
