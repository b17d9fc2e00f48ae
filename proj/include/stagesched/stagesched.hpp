#pragma once

#include "stagesched/core_model.hpp"
#include "stagesched/errors.hpp"
#include "stagesched/harness.hpp"
#include "stagesched/instance_moo.hpp"
#include "stagesched/latency_model.hpp"
#include "stagesched/oracle.hpp"
#include "stagesched/placement.hpp"
#include "stagesched/stage_moo.hpp"
#include "stagesched/traces.hpp"
