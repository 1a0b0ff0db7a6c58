#pragma once

#include "carnot/besicovitch.hpp"
#include "carnot/errors.hpp"
#include "carnot/gauge.hpp"
#include "carnot/group.hpp"
#include "carnot/json_io.hpp"
#include "carnot/plane.hpp"
#include "carnot/quotient.hpp"
#include "carnot/rng.hpp"
#include "carnot/rootfind.hpp"
#include "carnot/xreal.hpp"
