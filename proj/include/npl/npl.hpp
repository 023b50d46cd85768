#pragma once

#include "npl/centering.hpp"
#include "npl/dp.hpp"
#include "npl/error.hpp"
#include "npl/evaluate.hpp"
#include "npl/init.hpp"
#include "npl/model.hpp"
#include "npl/models/gmm.hpp"
#include "npl/models/logistic_ard.hpp"
#include "npl/models/normal_location.hpp"
#include "npl/optimize.hpp"
#include "npl/parallel.hpp"
#include "npl/points.hpp"
#include "npl/random.hpp"
#include "npl/sampler.hpp"
#include "npl/snis.hpp"
#include "npl/sweep.hpp"
