#pragma once

// Umbrella header for the numerical core (everything except the CLI layer).

#include "cattaneo/errors.hpp"
#include "cattaneo/thermo.hpp"
#include "cattaneo/symbol.hpp"
#include "cattaneo/parallel.hpp"
#include "cattaneo/sampling.hpp"
#include "cattaneo/spectral.hpp"
#include "cattaneo/symmetrize.hpp"
#include "cattaneo/coupling.hpp"
#include "cattaneo/waves.hpp"
