#pragma once

#include "netpath/distributions.hpp"
#include "netpath/errors.hpp"
#include "netpath/flow.hpp"
#include "netpath/io.hpp"
#include "netpath/laplacian.hpp"
#include "netpath/network.hpp"
#include "netpath/paths.hpp"
#include "netpath/reduce.hpp"
#include "netpath/report.hpp"
#include "netpath/stats.hpp"
