#pragma once

#include "hkctl/core.hpp"
#include "hkctl/random.hpp"
#include "hkctl/functionals.hpp"
#include "hkctl/dynamics.hpp"
#include "hkctl/controls.hpp"
#include "hkctl/regimes.hpp"
#include "hkctl/kinetic.hpp"
#include "hkctl/bench/scenario.hpp"
#include "hkctl/bench/run.hpp"
