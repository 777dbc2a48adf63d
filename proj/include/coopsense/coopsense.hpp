// Umbrella header.
#pragma once

#include "coopsense/core.hpp"
#include "coopsense/detector.hpp"
#include "coopsense/experiment.hpp"
#include "coopsense/fusion.hpp"
#include "coopsense/montecarlo.hpp"
#include "coopsense/noise_model.hpp"
#include "coopsense/random.hpp"
#include "coopsense/specfun.hpp"
#include "coopsense/threshold_schemes.hpp"
