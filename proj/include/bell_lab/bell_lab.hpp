#pragma once

// Umbrella header: hidden-variable models, locality checks, CHSH metrics,
// local-polytope membership, and the classical intensity-correlation
// experiment.

#include "bell_lab/angles.hpp"
#include "bell_lab/behavior.hpp"
#include "bell_lab/correlation.hpp"
#include "bell_lab/hbt.hpp"
#include "bell_lab/integrate.hpp"
#include "bell_lab/locality.hpp"
#include "bell_lab/model.hpp"
#include "bell_lab/models.hpp"
#include "bell_lab/outcome_table.hpp"
#include "bell_lab/polytope.hpp"
#include "bell_lab/rational.hpp"
#include "bell_lab/rng.hpp"
#include "bell_lab/simplex.hpp"
