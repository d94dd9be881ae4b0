#pragma once

#include "ldplab/core.hpp"
#include "ldplab/normal_tail.hpp"
#include "ldplab/random.hpp"
#include "ldplab/grid.hpp"
#include "ldplab/convex.hpp"
#include "ldplab/families.hpp"
#include "ldplab/estimate.hpp"
#include "ldplab/wsff.hpp"
#include "ldplab/lldp.hpp"
#include "ldplab/duality.hpp"
#include "ldplab/io.hpp"
#include "ldplab/config.hpp"
#include "ldplab/repro.hpp"
#include "ldplab/app.hpp"
