#pragma once

#include "stratpol/errors.hpp"
#include "stratpol/random.hpp"
#include "stratpol/core.hpp"
#include "stratpol/environment.hpp"
#include "stratpol/gradient.hpp"
#include "stratpol/objective.hpp"
#include "stratpol/learn.hpp"
#include "stratpol/metrics.hpp"
#include "stratpol/io.hpp"
#include "stratpol/experiments.hpp"
