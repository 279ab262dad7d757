#pragma once

#include "fmhd/grid.hpp"
#include "fmhd/field.hpp"
#include "fmhd/transform.hpp"
#include "fmhd/calculus.hpp"
#include "fmhd/identities.hpp"
#include "fmhd/random_state.hpp"
#include "fmhd/checkpoint.hpp"
#include "fmhd/diagnostics.hpp"
#include "fmhd/gronwall.hpp"
#include "fmhd/dynamics.hpp"
#include "fmhd/config.hpp"
#include "fmhd/harness.hpp"
