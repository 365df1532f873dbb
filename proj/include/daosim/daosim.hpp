#pragma once

#include "daosim/attacker.hpp"
#include "daosim/defense.hpp"
#include "daosim/engine.hpp"
#include "daosim/event_queue.hpp"
#include "daosim/harness.hpp"
#include "daosim/messages.hpp"
#include "daosim/metrics.hpp"
#include "daosim/node.hpp"
#include "daosim/scenario.hpp"
#include "daosim/topology.hpp"
#include "daosim/trickle.hpp"
#include "daosim/types.hpp"
