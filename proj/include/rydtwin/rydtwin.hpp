#pragma once

// Digital twin of a Rydberg-atom low-frequency electrometer: Stark physics,
// vapor-cell field screening, parametric EIT spectroscopy, field sources,
// noise synthesis/estimation, a software lock-in and the scenario engine.

#include "rydtwin/cell.hpp"
#include "rydtwin/config.hpp"
#include "rydtwin/experiments.hpp"
#include "rydtwin/io.hpp"
#include "rydtwin/lockin.hpp"
#include "rydtwin/noise.hpp"
#include "rydtwin/report.hpp"
#include "rydtwin/spectroscopy.hpp"
#include "rydtwin/stark.hpp"
#include "rydtwin/timeseries.hpp"
#include "rydtwin/waveforms.hpp"
