#pragma once

#include "qthermo/error.hpp"
#include "qthermo/generator.hpp"
#include "qthermo/stationary.hpp"
#include "qthermo/cycles.hpp"
#include "qthermo/evolve.hpp"
#include "qthermo/functionals.hpp"
#include "qthermo/fluxes.hpp"
#include "qthermo/finite_difference.hpp"
#include "qthermo/audit.hpp"
#include "qthermo/ensemble.hpp"
#include "qthermo/search.hpp"
#include "qthermo/model_io.hpp"
#include "qthermo/report_json.hpp"
