#pragma once

// Umbrella header.

#include "shorlab/arith.hpp"
#include "shorlab/errors.hpp"
#include "shorlab/modnum.hpp"
#include "shorlab/order_finding.hpp"
#include "shorlab/reports.hpp"
#include "shorlab/resources.hpp"
#include "shorlab/rng.hpp"
#include "shorlab/state.hpp"
