#pragma once

#include "error.hpp"
#include "field_dynamics.hpp"
#include "state_assembly.hpp"
#include "entanglement.hpp"
#include "revival_analysis.hpp"
#include "cli_io.hpp"
