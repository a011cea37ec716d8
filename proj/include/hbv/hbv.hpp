#pragma once

#include "hbv/capacity.hpp"
#include "hbv/curvature.hpp"
#include "hbv/field.hpp"
#include "hbv/graphcut.hpp"
#include "hbv/grid.hpp"
#include "hbv/io.hpp"
#include "hbv/mollify.hpp"
#include "hbv/perimeter.hpp"
#include "hbv/random_sets.hpp"
#include "hbv/shape.hpp"
#include "hbv/sum.hpp"
#include "hbv/variation.hpp"
