#pragma once

#include "phasewave/core/errors.hpp"
#include "phasewave/core/fields.hpp"
#include "phasewave/core/grid.hpp"
#include "phasewave/core/params.hpp"
#include "phasewave/core/potential.hpp"
#include "phasewave/evolvers/classical.hpp"
#include "phasewave/evolvers/ensemble.hpp"
#include "phasewave/evolvers/kramers.hpp"
#include "phasewave/evolvers/schrodinger.hpp"
#include "phasewave/experiments/experiments.hpp"
#include "phasewave/io/config_file.hpp"
#include "phasewave/io/files.hpp"
#include "phasewave/operators.hpp"
#include "phasewave/transforms.hpp"
