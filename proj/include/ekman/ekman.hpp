#pragma once

// Pseudo-spectral laboratory for the stochastically forced, linearly damped
// 2D Euler equations in vorticity form on the torus, with an ergodic
// statistics engine built on Cesaro time averages of cylindrical observables.

#include "ekman/config.hpp"
#include "ekman/diagnostics.hpp"
#include "ekman/dynamics.hpp"
#include "ekman/ergodics.hpp"
#include "ekman/field.hpp"
#include "ekman/grid.hpp"
#include "ekman/noise.hpp"
#include "ekman/observable.hpp"
#include "ekman/ou.hpp"
#include "ekman/rng.hpp"
#include "ekman/runner.hpp"
#include "ekman/snapshot.hpp"
#include "ekman/spectral.hpp"
