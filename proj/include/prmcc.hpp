#pragma once

#include "prmcc/combiner.hpp"
#include "prmcc/correntropy.hpp"
#include "prmcc/errors.hpp"
#include "prmcc/gradient_filter.hpp"
#include "prmcc/noise.hpp"
#include "prmcc/proportionate.hpp"
#include "prmcc/recursive_filter.hpp"
#include "prmcc/regressor.hpp"
#include "prmcc/rng.hpp"
#include "prmcc/simlab.hpp"
#include "prmcc/theory.hpp"
#include "prmcc/version.hpp"
