#pragma once

// Shape-following equal-area subdivision of 2D binary regions.

#include "sroi/centerline.hpp"
#include "sroi/distance.hpp"
#include "sroi/eikonal.hpp"
#include "sroi/error.hpp"
#include "sroi/grid.hpp"
#include "sroi/io.hpp"
#include "sroi/subdivision.hpp"
