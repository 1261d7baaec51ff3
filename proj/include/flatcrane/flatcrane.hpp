#pragma once

#include "flatcrane/ansatz.hpp"
#include "flatcrane/beam_model.hpp"
#include "flatcrane/config.hpp"
#include "flatcrane/csv.hpp"
#include "flatcrane/decoupling.hpp"
#include "flatcrane/errors.hpp"
#include "flatcrane/flat_param.hpp"
#include "flatcrane/ltv_canonical.hpp"
#include "flatcrane/params.hpp"
#include "flatcrane/planner.hpp"
