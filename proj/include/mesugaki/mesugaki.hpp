#pragma once

#include "mesugaki/core.hpp"
#include "mesugaki/rng.hpp"
#include "mesugaki/quadrature.hpp"
#include "mesugaki/parallel.hpp"
#include "mesugaki/point_process.hpp"
#include "mesugaki/mark_law.hpp"
#include "mesugaki/wakarase.hpp"
#include "mesugaki/construction.hpp"
#include "mesugaki/integral.hpp"
#include "mesugaki/ito_check.hpp"
#include "mesugaki/sde.hpp"
#include "mesugaki/diagnostics.hpp"
