#pragma once

// Umbrella header for the fabric ranking and selection engine.

#include "fabsel/comparator.hpp"
#include "fabsel/error.hpp"
#include "fabsel/explanation.hpp"
#include "fabsel/fabric.hpp"
#include "fabsel/manifest.hpp"
#include "fabsel/metrics.hpp"
#include "fabsel/pairgen.hpp"
#include "fabsel/prompt.hpp"
#include "fabsel/property.hpp"
#include "fabsel/ranking.hpp"
#include "fabsel/remote.hpp"
#include "fabsel/report.hpp"
#include "fabsel/selection.hpp"
#include "fabsel/sync.hpp"
#include "fabsel/synthetic.hpp"
