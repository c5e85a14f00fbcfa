#pragma once

// Matrix completion by singular value thresholding with adaptive randomized
// partial SVD (fixed-precision QB sketching with basis recycling and an
// annealed precision schedule).

#include "svt/dense.hpp"
#include "svt/io.hpp"
#include "svt/sampled.hpp"
#include "svt/sketch.hpp"
#include "svt/solver.hpp"
#include "svt/synth.hpp"
