#pragma once

#include "viciouskit/combinatorics.hpp"
#include "viciouskit/densities.hpp"
#include "viciouskit/linalg.hpp"
#include "viciouskit/montecarlo.hpp"
#include "viciouskit/quadrature.hpp"
#include "viciouskit/random.hpp"
#include "viciouskit/rmt.hpp"
#include "viciouskit/special_functions.hpp"
#include "viciouskit/stats.hpp"
#include "viciouskit/verify.hpp"
