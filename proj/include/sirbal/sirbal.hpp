#pragma once

#include "sirbal/balancer.hpp"
#include "sirbal/error.hpp"
#include "sirbal/generate.hpp"
#include "sirbal/model.hpp"
#include "sirbal/oracle.hpp"
#include "sirbal/projection.hpp"
#include "sirbal/saddle.hpp"
#include "sirbal/scenario.hpp"
#include "sirbal/spectral.hpp"
#include "sirbal/utility.hpp"
#include "sirbal/utility_opt.hpp"
