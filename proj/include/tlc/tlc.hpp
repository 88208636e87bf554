#pragma once

#include "tlc/arrivals.hpp"
#include "tlc/config.hpp"
#include "tlc/config_io.hpp"
#include "tlc/cost.hpp"
#include "tlc/errors.hpp"
#include "tlc/estimation.hpp"
#include "tlc/events.hpp"
#include "tlc/experiments.hpp"
#include "tlc/io.hpp"
#include "tlc/ipa.hpp"
#include "tlc/lights.hpp"
#include "tlc/optimizer.hpp"
#include "tlc/sample.hpp"
#include "tlc/simulator.hpp"
#include "tlc/transit.hpp"
