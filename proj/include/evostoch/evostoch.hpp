#pragma once

#include "evostoch/cluster.hpp"
#include "evostoch/csv.hpp"
#include "evostoch/distributions.hpp"
#include "evostoch/ea.hpp"
#include "evostoch/errors.hpp"
#include "evostoch/export.hpp"
#include "evostoch/metrics.hpp"
#include "evostoch/portfolio.hpp"
#include "evostoch/risk.hpp"
#include "evostoch/rng.hpp"
#include "evostoch/tree.hpp"
#include "evostoch/variation.hpp"
