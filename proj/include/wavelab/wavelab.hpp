#pragma once

#include "wavelab/core.hpp"
#include "wavelab/discrete_ops.hpp"
#include "wavelab/tridiagonal.hpp"
#include "wavelab/plane_wave.hpp"
#include "wavelab/equations.hpp"
#include "wavelab/stationary.hpp"
#include "wavelab/analytic.hpp"
#include "wavelab/evolution.hpp"
#include "wavelab/em_kinematics.hpp"
#include "wavelab/observables.hpp"
