#pragma once

#include "attrsample/error.hpp"
#include "attrsample/generator.hpp"
#include "attrsample/graph.hpp"
#include "attrsample/harness.hpp"
#include "attrsample/kmeans.hpp"
#include "attrsample/metrics.hpp"
#include "attrsample/sample_state.hpp"
#include "attrsample/samplers.hpp"
#include "attrsample/surprise.hpp"
#include "attrsample/tasks.hpp"
