#pragma once

#include "adl/errors.hpp"
#include "adl/linalg.hpp"
#include "adl/rng.hpp"
#include "adl/parallel.hpp"
#include "adl/expansive.hpp"
#include "adl/quasinorm.hpp"
#include "adl/geometry.hpp"
#include "adl/tiling.hpp"
#include "adl/sequences.hpp"
#include "adl/matching.hpp"
#include "adl/operators.hpp"
#include "adl/io.hpp"
#include "adl/report.hpp"
#include "adl/commands.hpp"
