#pragma once

#include "shadows/dilation.hpp"
#include "shadows/errors.hpp"
#include "shadows/grid.hpp"
#include "shadows/io.hpp"
#include "shadows/lp.hpp"
#include "shadows/measure.hpp"
#include "shadows/potential.hpp"
#include "shadows/report.hpp"
#include "shadows/root.hpp"
#include "shadows/shadow.hpp"
#include "shadows/simulate.hpp"
#include "shadows/solvers.hpp"
#include "shadows/svg.hpp"
#include "shadows/time_change.hpp"
#include "shadows/verify.hpp"
