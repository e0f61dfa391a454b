#pragma once

// Umbrella header for the labelnoise library: noise-corrected learning from
// weakly annotated data via confusion-matrix inversion.

#include "labelnoise/confusion.hpp"
#include "labelnoise/density.hpp"
#include "labelnoise/error.hpp"
#include "labelnoise/experiment.hpp"
#include "labelnoise/io.hpp"
#include "labelnoise/loss.hpp"
#include "labelnoise/parallel.hpp"
#include "labelnoise/personalize.hpp"
#include "labelnoise/pmf.hpp"
#include "labelnoise/rng.hpp"
