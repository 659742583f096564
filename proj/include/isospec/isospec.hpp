#pragma once

#include "isospec/analytic.hpp"
#include "isospec/counting.hpp"
#include "isospec/eig.hpp"
#include "isospec/error.hpp"
#include "isospec/fem.hpp"
#include "isospec/geom.hpp"
#include "isospec/io.hpp"
#include "isospec/mesh.hpp"
#include "isospec/rng.hpp"
#include "isospec/specfun.hpp"
