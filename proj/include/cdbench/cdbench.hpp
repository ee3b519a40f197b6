#pragma once

#include "cdbench/bench.hpp"
#include "cdbench/dag.hpp"
#include "cdbench/discovery.hpp"
#include "cdbench/graphgen.hpp"
#include "cdbench/io.hpp"
#include "cdbench/kernels.hpp"
#include "cdbench/metrics.hpp"
#include "cdbench/pruning.hpp"
#include "cdbench/random.hpp"
#include "cdbench/scm.hpp"
#include "cdbench/stats.hpp"
#include "cdbench/stein.hpp"
