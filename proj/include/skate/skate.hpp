#pragma once

#include "skate/errors.hpp"
#include "skate/model.hpp"
#include "skate/controls.hpp"
#include "skate/ode.hpp"
#include "skate/trajectory.hpp"
#include "skate/geometry.hpp"
#include "skate/optimize.hpp"
#include "skate/arcopt.hpp"
#include "skate/arcfit.hpp"
#include "skate/pattern.hpp"
#include "skate/io.hpp"
