#pragma once

#include "homewise/scenarios/calculators.hpp"
#include "homewise/scenarios/compare.hpp"
#include "homewise/scenarios/lighting.hpp"
#include "homewise/scenarios/recommend.hpp"
