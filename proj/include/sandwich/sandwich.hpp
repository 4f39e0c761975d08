#pragma once

#include "sandwich/core.hpp"
#include "sandwich/parallel.hpp"
#include "sandwich/noise.hpp"
#include "sandwich/drift.hpp"
#include "sandwich/scheme.hpp"
#include "sandwich/analysis.hpp"
#include "sandwich/config.hpp"
#include "sandwich/commands.hpp"
