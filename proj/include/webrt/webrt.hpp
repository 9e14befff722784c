#pragma once

#include "webrt/browser_model.hpp"
#include "webrt/errors.hpp"
#include "webrt/fitting.hpp"
#include "webrt/manifest.hpp"
#include "webrt/network_profile.hpp"
#include "webrt/predictor.hpp"
#include "webrt/size_time_model.hpp"
#include "webrt/waterfall.hpp"
