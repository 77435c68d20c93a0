#pragma once

#include "reliquant/campaign.hpp"
#include "reliquant/domain.hpp"
#include "reliquant/error.hpp"
#include "reliquant/fault_tree.hpp"
#include "reliquant/fault_tree_analysis.hpp"
#include "reliquant/monitor.hpp"
#include "reliquant/numeric.hpp"
#include "reliquant/op_profile.hpp"
#include "reliquant/oracle.hpp"
#include "reliquant/philox.hpp"
#include "reliquant/predicate.hpp"
#include "reliquant/rel_stats.hpp"
#include "reliquant/report.hpp"
#include "reliquant/subject.hpp"
