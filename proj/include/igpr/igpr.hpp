#pragma once

#include "igpr/abc/rejection.hpp"
#include "igpr/error.hpp"
#include "igpr/experiment/config.hpp"
#include "igpr/experiment/report.hpp"
#include "igpr/experiment/runner.hpp"
#include "igpr/gp/kernel.hpp"
#include "igpr/gp/nelder_mead.hpp"
#include "igpr/gp/regression.hpp"
#include "igpr/gp/training_set.hpp"
#include "igpr/inference/gaussian.hpp"
#include "igpr/inference/igpr.hpp"
#include "igpr/inference/posterior.hpp"
#include "igpr/inference/run_record.hpp"
#include "igpr/inference/schedule.hpp"
#include "igpr/models/registry.hpp"
#include "igpr/prior.hpp"
#include "igpr/random.hpp"
#include "igpr/stats/summary.hpp"
