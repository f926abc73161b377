#pragma once

// Umbrella header for the library (the CLI front end is separate: csi/cli.hpp).

#include "csi/amplitudes.hpp"
#include "csi/detection.hpp"
#include "csi/error.hpp"
#include "csi/experiments.hpp"
#include "csi/imaging.hpp"
#include "csi/io.hpp"
#include "csi/modes.hpp"
#include "csi/parallel.hpp"
#include "csi/pgm.hpp"
#include "csi/scene.hpp"
#include "csi/spectra.hpp"
