#pragma once

#include "homing/closed_form.hpp"
#include "homing/errors.hpp"
#include "homing/hjb_numeric.hpp"
#include "homing/policy.hpp"
#include "homing/power_law.hpp"
#include "homing/problem.hpp"
#include "homing/rng.hpp"
#include "homing/simulate.hpp"
