#pragma once

// Umbrella header for the whole library.

#include "regmdp/identities.hpp"
#include "regmdp/io.hpp"
#include "regmdp/linalg.hpp"
#include "regmdp/mdp.hpp"
#include "regmdp/random.hpp"
#include "regmdp/regularizers.hpp"
#include "regmdp/solver.hpp"
