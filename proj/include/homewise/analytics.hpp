#pragma once

#include "homewise/analytics/anomaly.hpp"
#include "homewise/analytics/baseline.hpp"
#include "homewise/analytics/decompose.hpp"
#include "homewise/analytics/iforest.hpp"
#include "homewise/analytics/profile.hpp"
#include "homewise/analytics/stats.hpp"
