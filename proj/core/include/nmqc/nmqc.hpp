// nmqc.hpp: umbrella header
#pragma once

#include "nmqc/config.hpp"
#include "nmqc/control.hpp"
#include "nmqc/csv_io.hpp"
#include "nmqc/ensemble.hpp"
#include "nmqc/errors.hpp"
#include "nmqc/kernels.hpp"
#include "nmqc/qubit.hpp"
#include "nmqc/rng.hpp"
#include "nmqc/sde.hpp"
