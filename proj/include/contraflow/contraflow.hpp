#pragma once

#include "contraflow/config.hpp"
#include "contraflow/cost.hpp"
#include "contraflow/laneopt.hpp"
#include "contraflow/model.hpp"
#include "contraflow/netio.hpp"
#include "contraflow/parallel.hpp"
#include "contraflow/pipeline.hpp"
#include "contraflow/tap.hpp"
